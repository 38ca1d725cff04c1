#pragma once
// A trained network read as a portfolio of bonds and bond options, priced in
// closed form at any t <= T_m.
//
// Local designs (one bond per node):  node payoff max(w P(T_m,U) + b, 0)
//   w > 0, b >= 0  forward      w P(t,U) + b P(t,T_m)
//   w > 0, b < 0   call         w P(t,U) Phi(d+) + b P(t,T_m) Phi(d-)
//   w < 0, b > 0   put          b P(t,T_m) Phi(-d-) + w P(t,U) Phi(-d+)
//   otherwise      worthless    (w = 0, b > 0 is cash, priced as a forward)
// with d+- = (log(|w| P(t,U) / (|b| P(t,T_m))) +- s^2/2) / s and s^2 the
// bond option variance.
//
// Log design: Y = w . log P(T_m, U) + b is Gaussian under the T_m-forward
// measure, so the node is worth P(t,T_m) (s_Y phi(d) + m_Y Phi(d)), d = m_Y/s_Y.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "bermudan/regression.hpp"
#include "bermudan/termstructure.hpp"

namespace bermudan {

/// Network inputs observed at T_m: bonds P(T_m, T_m + delta_k) with
/// delta_k = k (T_M - T_m) / n, k = 1..n, or their logarithms.
struct InputMap {
    NetworkDesign design = NetworkDesign::OneFactor;
    double expiry = 0.0;  // T_m
    std::vector<double> maturities;
    std::vector<BondCoeffs> bonds;

    std::size_t size() const { return maturities.size(); }
    /// Writes the inputs for state x at T_m into z.
    void evaluate(std::span<const double> x, double* z) const;
    std::vector<double> evaluate(std::span<const double> x) const;
};

/// n_inputs defaults to 1 for OneFactor and to the factor count otherwise.
InputMap make_input_map(const GaussianModel& model, NetworkDesign design, double expiry,
                        double final_maturity, std::size_t n_inputs = 0);

enum class NodeKind { Forward, Call, Put, Worthless, LogBasket };

const char* to_string(NodeKind k);

/// Sign classification of a single-bond node w P + b.
NodeKind classify(double w, double b);

/// Time-t value of max(w P(T_m,U) + b, 0) in state x.
double node_value_local(const GaussianModel& model, double t, std::span<const double> x, double w,
                        double b, double expiry, double underlying);

/// Time-t value of max(w . log P(T_m, U) + b, 0) in state x.
double node_value_log(const GaussianModel& model, double t, std::span<const double> x,
                      std::span<const double> w, double b, double expiry,
                      std::span<const double> underlyings);

/// Prices the portfolio of one network at a fixed valuation time t for many
/// states. Coefficients that only depend on (t, T_m) are computed once.
class PortfolioPricer {
public:
    PortfolioPricer(const GaussianModel& model, const HedgeNetwork& net, const InputMap& inputs,
                    double t);

    double value(std::span<const double> x) const;
    double valuation_time() const { return t_; }

private:
    struct LocalNode {
        NodeKind kind;
        std::size_t input;
        double w, b, log_w, log_b;
        double quantity;  // w2
    };
    struct LogNode {
        double mean0;               // mean of Y at x = 0
        std::vector<double> slope;  // d mean / d x_t
        double sd;
        double quantity;
    };

    const HedgeNetwork* net_;
    const InputMap* inputs_;
    double t_;
    bool terminal_;
    std::size_t d_;
    BondCoeffs expiry_bond_;           // P(t, T_m)
    std::vector<BondCoeffs> under_;    // P(t, U_k)
    std::vector<double> sd_;           // option vol per input
    std::vector<LocalNode> local_;
    std::vector<LogNode> log_;
};

double portfolio_value(const GaussianModel& model, double t, std::span<const double> x,
                       const HedgeNetwork& net, const InputMap& inputs);

/// One row of the portfolio report.
struct PortfolioNode {
    NodeKind kind = NodeKind::Worthless;
    std::size_t input = 0;
    double underlying = 0.0;  // bond maturity (local designs)
    double quantity = 0.0;
    double strike = 0.0;
    double value = 0.0;       // time-zero value of the position
    std::vector<double> weights;  // log design
};

/// Calls and puts get quantity w2 |w| and strike -b/w; forwards get quantity
/// w2 w bonds and strike -b/w; log nodes get quantity w2 and strike -b.
std::vector<PortfolioNode> portfolio_nodes(const GaussianModel& model, const HedgeNetwork& net,
                                           const InputMap& inputs);

void write_portfolio_csv(std::ostream& out, std::size_t date_index, double expiry,
                         const std::vector<PortfolioNode>& nodes, bool header);

}  // namespace bermudan
