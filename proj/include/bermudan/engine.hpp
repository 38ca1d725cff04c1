#pragma once
// Regress-later backward induction: one network per monitor date, each
// trained on max(continuation, exercise) where the continuation is the
// closed-form value of the next date's portfolio.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bermudan/instruments.hpp"
#include "bermudan/portfolio.hpp"
#include "bermudan/regression.hpp"
#include "bermudan/simulation.hpp"

namespace bermudan {

struct TrainConfig {
    std::size_t n_paths = 20000;
    std::size_t q = 64;
    NetworkDesign design = NetworkDesign::OneFactor;
    std::size_t n_inputs = 0;  // 0: design default
    double dt = 1.0 / 52.0;
    Measure measure = Measure::ForwardTM;
    // A fraction of the training states is drawn with factor vols scaled by
    // domain_scale, widening the regression domain. Targets always use the
    // true model.
    double domain_scale = 1.0;
    double wide_fraction = 0.0;
    TrainOptions optimizer;
};

struct DateDiagnostics {
    std::size_t index = 0;
    double date = 0.0;
    double mse = 0.0;
    double mae = 0.0;
    double discounted_mae = 0.0;  // time-zero value of the mean absolute error
    std::size_t epochs = 0;
};

struct HedgeSet {
    BermudanSpec spec;
    TrainConfig config;
    std::uint64_t seed = 0;
    std::vector<HedgeNetwork> networks;  // G_0 .. G_{K-1}
    std::vector<InputMap> inputs;
    std::vector<DateDiagnostics> diagnostics;
    double direct_estimate = 0.0;

    std::size_t dates() const { return networks.size(); }
};

/// Seeds used by fit_hedge, derived from the user seed.
std::uint64_t training_path_seed(std::uint64_t seed);

/// Fits G_{K-1} .. G_0 and the time-zero direct estimate. Training failures
/// are rethrown as TrainingError naming the date index.
HedgeSet fit_hedge(const GaussianModel& model, const BermudanSpec& spec, const TrainConfig& cfg,
                   std::uint64_t seed);

/// Rebuilds a hedge from trained networks (e.g. read from disk): input maps,
/// and the direct estimate. Diagnostics are left as given.
void attach_model(HedgeSet& hedge, const GaussianModel& model);

struct ErrorMargins {
    double epsilon = 0.0;
    double direct = 0.0;  // M eps
    double lower = 0.0;   // 2 (M - 1) eps
    double upper = 0.0;   // M (M - 1) eps
};

ErrorMargins error_margins(const HedgeSet& hedge);

void write_diagnostics_csv(std::ostream& out, const HedgeSet& hedge);

/// Text record: contract, direct estimate, diagnostics and every network.
void write_hedge_set(std::ostream& out, const HedgeSet& hedge);
/// Reads a record written by write_hedge_set and re-attaches the model.
HedgeSet read_hedge_set(std::istream& in, const GaussianModel& model);

}  // namespace bermudan
