#pragma once
// Shallow ReLU networks G(z) = sigma_V * w2 . relu(w1 (z - mu_z)/sigma_z + b)
// and their AdaMax training on mean-squared error.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bermudan {

enum class NetworkDesign { OneFactor, LocallyConnected, FullyConnectedLog };

const char* to_string(NetworkDesign d);
NetworkDesign design_from_string(const std::string& s);

struct HedgeNetwork {
    NetworkDesign design = NetworkDesign::OneFactor;
    std::size_t q = 0;       // hidden nodes
    std::size_t inputs = 0;  // input dimension
    std::vector<double> w1;  // q x inputs, row-major
    std::vector<double> b;   // q
    std::vector<double> w2;  // q
    std::vector<unsigned char> mask;  // q x inputs
    std::vector<double> mu_z;
    std::vector<double> sigma_z;
    double sigma_v = 1.0;

    /// Output in raw units for a raw input vector. Throws std::invalid_argument
    /// on a dimension mismatch.
    double forward(std::span<const double> z) const;
    /// Output for an already normalized input, before the sigma_V scaling.
    double forward_normalized(const double* z) const;

    /// Input column of hidden node j under the locally connected layout.
    static std::size_t assigned_input(std::size_t j, std::size_t q, std::size_t inputs) {
        return j * inputs / q;
    }
};

/// Normalized regression data. x is n x inputs row-major.
struct TrainingSet {
    std::size_t n = 0;
    std::size_t inputs = 0;
    std::vector<double> x;
    std::vector<double> y;
};

struct Normalization {
    std::vector<double> mu_z;
    std::vector<double> sigma_z;
    double sigma_v = 1.0;
};

/// Centres and scales inputs per column; scales targets by their sample SD
/// without centring. A constant input column throws std::domain_error.
/// Constant targets get sigma_V = 1 when they are all zero, otherwise |y|.
std::pair<TrainingSet, Normalization> normalize(std::span<const double> raw_inputs,
                                                std::span<const double> raw_targets,
                                                std::size_t inputs);

/// Stores the constants on the network.
void apply_normalization(HedgeNetwork& net, const Normalization& norm);

/// Random or warm-started parameters: w1 ~ U(-1,0), b ~ U(0,1), w2 ~ U(-1,1).
/// A warm start copies prev.
HedgeNetwork initialize(NetworkDesign design, std::size_t q, std::size_t inputs,
                        const HedgeNetwork* prev, std::uint64_t seed);

struct TrainOptions {
    std::size_t epochs = 3000;
    std::size_t batch = 32;
    double learning_rate = 5e-4;
    double final_learning_rate = 1e-4;  // geometric decay towards this value
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double tolerance = 1e-7;  // early stop when the best MSE improves less than this
    std::size_t patience = 100;
    bool shuffle = true;
    // After the optimizer, re-solve w2 by least squares on the hidden layer
    // and keep it when the training MSE drops.
    bool refit_output = true;
    std::uint64_t seed = 1;
};

struct TrainDiagnostics {
    double mse = 0.0;  // raw units
    double mae = 0.0;  // raw units
    double normalized_mse = 0.0;
    std::size_t epochs = 0;
};

/// Thrown when the loss becomes non-finite.
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, std::size_t epoch)
        : std::runtime_error(what), epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

/// AdaMax on the mean-squared error over mini-batches. Keeps the parameters
/// of the epoch with the lowest full-sample MSE.
TrainDiagnostics train(HedgeNetwork& net, const TrainingSet& data, const TrainOptions& opts);

/// Least-squares w2 for the current hidden layer. Returns true and updates
/// net when the training MSE improves.
bool refit_output_layer(HedgeNetwork& net, const TrainingSet& data);

/// Mean-squared error over rows idx (all rows if empty) and its gradient with
/// respect to (w1, b, w2), laid out like the network fields. Off-mask w1
/// gradients are zero.
struct Gradient {
    std::vector<double> w1, b, w2;
};
double loss_and_gradient(const HedgeNetwork& net, const TrainingSet& data,
                         std::span<const std::size_t> idx, Gradient* grad);

/// Raw-asset-space coefficients: G(z) = sum_j w2_j relu(w1_j . z + b_j).
struct EffectiveWeights {
    std::size_t q = 0;
    std::size_t inputs = 0;
    std::vector<double> w1;
    std::vector<double> b;
    std::vector<double> w2;
};
EffectiveWeights denormalized_portfolio_weights(const HedgeNetwork& net);

/// Text record with hexadecimal floats; round-trips bit-exactly.
void write_network(std::ostream& out, const HedgeNetwork& net);
HedgeNetwork read_network(std::istream& in);

}  // namespace bermudan
