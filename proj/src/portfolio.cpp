#include "bermudan/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "bermudan/errors.hpp"
#include "bermudan/random.hpp"

namespace bermudan {

void InputMap::evaluate(std::span<const double> x, double* z) const {
    const bool logs = design == NetworkDesign::FullyConnectedLog;
    for (std::size_t k = 0; k < bonds.size(); ++k) {
        double e = bonds[k].A;
        for (std::size_t i = 0; i < x.size(); ++i) e -= bonds[k].B[i] * x[i];
        z[k] = logs ? e : std::exp(e);
    }
}

std::vector<double> InputMap::evaluate(std::span<const double> x) const {
    std::vector<double> z(size());
    evaluate(x, z.data());
    return z;
}

InputMap make_input_map(const GaussianModel& model, NetworkDesign design, double expiry,
                        double final_maturity, std::size_t n_inputs) {
    if (!(final_maturity > expiry)) throw std::domain_error("input bonds must mature after expiry");
    if (n_inputs == 0) n_inputs = design == NetworkDesign::OneFactor ? 1 : model.factors();
    if (design == NetworkDesign::OneFactor && n_inputs != 1)
        throw std::invalid_argument("one-factor design takes a single bond");
    InputMap map;
    map.design = design;
    map.expiry = expiry;
    for (std::size_t k = 1; k <= n_inputs; ++k) {
        const double u = k == n_inputs ? final_maturity
                                       : expiry + static_cast<double>(k) * (final_maturity - expiry) /
                                                      static_cast<double>(n_inputs);
        map.maturities.push_back(u);
        map.bonds.push_back(bond_coeffs(model, expiry, u));
    }
    return map;
}

const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Forward: return "forward";
        case NodeKind::Call: return "call";
        case NodeKind::Put: return "put";
        case NodeKind::Worthless: return "worthless";
        case NodeKind::LogBasket: return "log_basket";
    }
    return "?";
}

NodeKind classify(double w, double b) {
    if (w > 0.0) return b >= 0.0 ? NodeKind::Forward : NodeKind::Call;
    if (w < 0.0) return b > 0.0 ? NodeKind::Put : NodeKind::Worthless;
    return b > 0.0 ? NodeKind::Forward : NodeKind::Worthless;
}

namespace {

double log_price(const BondCoeffs& c, std::span<const double> x) {
    double e = c.A;
    for (std::size_t i = 0; i < x.size(); ++i) e -= c.B[i] * x[i];
    return e;
}

// Option value from log prices; sd > 0.
double local_value(NodeKind kind, double w, double b, double log_pu, double log_pe, double sd) {
    switch (kind) {
        case NodeKind::Worthless: return 0.0;
        case NodeKind::Forward: return w * std::exp(log_pu) + b * std::exp(log_pe);
        case NodeKind::Call:
        case NodeKind::Put: {
            const double m = std::log(std::abs(w)) - std::log(std::abs(b)) + log_pu - log_pe;
            const double dp = m / sd + 0.5 * sd;
            const double dm = dp - sd;
            if (kind == NodeKind::Call)
                return w * std::exp(log_pu) * normal_cdf(dp) + b * std::exp(log_pe) * normal_cdf(dm);
            return b * std::exp(log_pe) * normal_cdf(-dm) + w * std::exp(log_pu) * normal_cdf(-dp);
        }
        default: break;
    }
    throw std::logic_error("log-basket node in local pricer");
}

double gaussian_call(double mean, double sd) {
    if (!(sd > 0.0)) return std::max(mean, 0.0);
    const double d = mean / sd;
    return sd * normal_pdf(d) + mean * normal_cdf(d);
}

}  // namespace

double node_value_local(const GaussianModel& model, double t, std::span<const double> x, double w,
                        double b, double expiry, double underlying) {
    if (t > expiry) throw std::domain_error("valuation after expiry");
    const NodeKind kind = classify(w, b);
    if (t == expiry) return std::max(w * bond_price(model, t, underlying, x) + b, 0.0);
    const double var = bond_option_variance(model, t, expiry, underlying);
    if (!(var > 0.0)) throw NumericError("degenerate bond option volatility");
    return local_value(kind, w, b, log_price(bond_coeffs(model, t, underlying), x),
                       log_price(bond_coeffs(model, t, expiry), x), std::sqrt(var));
}

double node_value_log(const GaussianModel& model, double t, std::span<const double> x,
                      std::span<const double> w, double b, double expiry,
                      std::span<const double> underlyings) {
    if (t > expiry) throw std::domain_error("valuation after expiry");
    if (w.size() != underlyings.size()) throw ContractError("weight/underlying mismatch");
    const std::size_t d = model.factors();
    double c = b;
    std::vector<double> beta(d, 0.0);
    for (std::size_t k = 0; k < w.size(); ++k) {
        const BondCoeffs bc = bond_coeffs(model, expiry, underlyings[k]);
        c += w[k] * bc.A;
        for (std::size_t i = 0; i < d; ++i) beta[i] += w[k] * bc.B[i];
    }
    const GaussianMoments mom = forward_measure_moments(model, t, expiry, x);
    double mean = c;
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        mean -= beta[i] * mom.mean[i];
        for (std::size_t j = 0; j < d; ++j) var += beta[i] * mom.cov[i * d + j] * beta[j];
    }
    return bond_price(model, t, expiry, x) * gaussian_call(mean, std::sqrt(std::max(var, 0.0)));
}

PortfolioPricer::PortfolioPricer(const GaussianModel& model, const HedgeNetwork& net,
                                 const InputMap& inputs, double t)
    : net_(&net), inputs_(&inputs), t_(t), terminal_(t == inputs.expiry), d_(model.factors()) {
    if (t > inputs.expiry) throw std::domain_error("valuation after expiry");
    if (net.inputs != inputs.size()) throw ContractError("network/input map mismatch");
    if (terminal_) return;

    const double tm = inputs.expiry;
    const EffectiveWeights eff = denormalized_portfolio_weights(net);
    expiry_bond_ = bond_coeffs(model, t, tm);

    if (inputs.design != NetworkDesign::FullyConnectedLog) {
        for (double u : inputs.maturities) {
            under_.push_back(bond_coeffs(model, t, u));
            const double var = bond_option_variance(model, t, tm, u);
            if (!(var > 0.0)) throw NumericError("degenerate bond option volatility");
            sd_.push_back(std::sqrt(var));
        }
        for (std::size_t j = 0; j < net.q; ++j) {
            std::size_t k = 0;
            while (k + 1 < net.inputs && !net.mask[j * net.inputs + k]) ++k;
            LocalNode node;
            node.input = k;
            node.w = eff.w1[j * net.inputs + k];
            node.b = eff.b[j];
            node.kind = classify(node.w, node.b);
            node.log_w = node.w != 0.0 ? std::log(std::abs(node.w)) : 0.0;
            node.log_b = node.b != 0.0 ? std::log(std::abs(node.b)) : 0.0;
            node.quantity = eff.w2[j];
            if (node.kind != NodeKind::Worthless && node.quantity != 0.0) local_.push_back(node);
        }
        return;
    }

    // Y = c - beta . x_Tm,  x_Tm ~ N(exp(-a tau) x_t - Theta, C) under Q^{T_m}
    const std::vector<double> theta = forward_drift_adjustment(model, t, tm);
    const std::vector<double> cov = factor_covariance(model, t, tm);
    std::vector<double> decay(d_);
    for (std::size_t i = 0; i < d_; ++i) decay[i] = std::exp(-model.mean_reversion(i) * (tm - t));
    for (std::size_t j = 0; j < net.q; ++j) {
        if (eff.w2[j] == 0.0) continue;
        double c = eff.b[j];
        std::vector<double> beta(d_, 0.0);
        for (std::size_t k = 0; k < net.inputs; ++k) {
            const double w = eff.w1[j * net.inputs + k];
            c += w * inputs.bonds[k].A;
            for (std::size_t i = 0; i < d_; ++i) beta[i] += w * inputs.bonds[k].B[i];
        }
        LogNode node;
        node.mean0 = c;
        node.slope.resize(d_);
        double var = 0.0;
        for (std::size_t i = 0; i < d_; ++i) {
            node.mean0 += beta[i] * theta[i];
            node.slope[i] = -beta[i] * decay[i];
            for (std::size_t l = 0; l < d_; ++l) var += beta[i] * cov[i * d_ + l] * beta[l];
        }
        node.sd = std::sqrt(std::max(var, 0.0));
        node.quantity = eff.w2[j];
        log_.push_back(std::move(node));
    }
}

double PortfolioPricer::value(std::span<const double> x) const {
    if (x.size() != d_) throw ContractError("state dimension mismatch");
    if (terminal_) {
        double z[16];
        std::vector<double> big;
        double* p = z;
        if (inputs_->size() > 16) {
            big.resize(inputs_->size());
            p = big.data();
        }
        inputs_->evaluate(x, p);
        return net_->forward(std::span<const double>(p, inputs_->size()));
    }
    const double log_pe = log_price(expiry_bond_, x);
    if (!log_.empty()) {
        double sum = 0.0;
        for (const auto& node : log_) {
            double mean = node.mean0;
            for (std::size_t i = 0; i < d_; ++i) mean += node.slope[i] * x[i];
            sum += node.quantity * gaussian_call(mean, node.sd);
        }
        return std::exp(log_pe) * sum;
    }

    double log_pu[16];
    std::vector<double> big;
    double* lp = log_pu;
    if (under_.size() > 16) {
        big.resize(under_.size());
        lp = big.data();
    }
    for (std::size_t k = 0; k < under_.size(); ++k) lp[k] = log_price(under_[k], x);
    const double pe = std::exp(log_pe);
    double sum = 0.0;
    for (const auto& n : local_) {
        const double lpu = lp[n.input];
        switch (n.kind) {
            case NodeKind::Forward: sum += n.quantity * (n.w * std::exp(lpu) + n.b * pe); break;
            case NodeKind::Call:
            case NodeKind::Put: {
                const double sd = sd_[n.input];
                const double dp = (n.log_w - n.log_b + lpu - log_pe) / sd + 0.5 * sd;
                const double dm = dp - sd;
                const double pu = std::exp(lpu);
                const double v = n.kind == NodeKind::Call
                                     ? n.w * pu * normal_cdf(dp) + n.b * pe * normal_cdf(dm)
                                     : n.b * pe * normal_cdf(-dm) + n.w * pu * normal_cdf(-dp);
                sum += n.quantity * v;
                break;
            }
            default: break;
        }
    }
    return sum;
}

double portfolio_value(const GaussianModel& model, double t, std::span<const double> x,
                       const HedgeNetwork& net, const InputMap& inputs) {
    return PortfolioPricer(model, net, inputs, t).value(x);
}

std::vector<PortfolioNode> portfolio_nodes(const GaussianModel& model, const HedgeNetwork& net,
                                           const InputMap& inputs) {
    const EffectiveWeights eff = denormalized_portfolio_weights(net);
    const std::vector<double> x0(model.factors(), 0.0);
    std::vector<PortfolioNode> nodes;
    for (std::size_t j = 0; j < net.q; ++j) {
        PortfolioNode node;
        const double q2 = eff.w2[j];
        if (inputs.design == NetworkDesign::FullyConnectedLog) {
            node.kind = NodeKind::LogBasket;
            node.weights.assign(eff.w1.begin() + static_cast<std::ptrdiff_t>(j * net.inputs),
                                eff.w1.begin() + static_cast<std::ptrdiff_t>((j + 1) * net.inputs));
            node.quantity = q2;
            node.strike = -eff.b[j];
            node.value = q2 * node_value_log(model, 0.0, x0, node.weights, eff.b[j], inputs.expiry,
                                             inputs.maturities);
        } else {
            std::size_t k = 0;
            while (k + 1 < net.inputs && !net.mask[j * net.inputs + k]) ++k;
            const double w = eff.w1[j * net.inputs + k];
            const double b = eff.b[j];
            node.kind = classify(w, b);
            node.input = k;
            node.underlying = inputs.maturities[k];
            switch (node.kind) {
                case NodeKind::Call:
                case NodeKind::Put:
                    node.quantity = q2 * std::abs(w);
                    node.strike = -b / w;
                    break;
                case NodeKind::Forward:
                    node.quantity = w != 0.0 ? q2 * w : q2 * b;
                    node.strike = w != 0.0 ? -b / w : 0.0;
                    break;
                default: break;
            }
            node.value = q2 * node_value_local(model, 0.0, x0, w, b, inputs.expiry, node.underlying);
        }
        nodes.push_back(std::move(node));
    }
    return nodes;
}

void write_portfolio_csv(std::ostream& out, std::size_t date_index, double expiry,
                         const std::vector<PortfolioNode>& nodes, bool header) {
    if (header) out << "date_index,expiry,node,kind,underlying,quantity,strike,value\n";
    const auto old = out.precision(17);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const auto& n = nodes[j];
        out << date_index << ',' << expiry << ',' << j << ',' << to_string(n.kind) << ',';
        if (n.kind == NodeKind::LogBasket) {
            out << '"';
            for (std::size_t k = 0; k < n.weights.size(); ++k) out << (k ? ";" : "") << n.weights[k];
            out << '"';
        } else {
            out << n.underlying;
        }
        out << ',' << n.quantity << ',' << n.strike << ',' << n.value << '\n';
    }
    out.precision(old);
}

}  // namespace bermudan
