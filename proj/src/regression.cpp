#include "bermudan/regression.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bermudan/errors.hpp"
#include "bermudan/random.hpp"

namespace bermudan {

const char* to_string(NetworkDesign d) {
    switch (d) {
        case NetworkDesign::OneFactor: return "one_factor";
        case NetworkDesign::LocallyConnected: return "locally_connected";
        case NetworkDesign::FullyConnectedLog: return "fully_connected_log";
    }
    return "?";
}

NetworkDesign design_from_string(const std::string& s) {
    if (s == "one_factor" || s == "1f") return NetworkDesign::OneFactor;
    if (s == "locally_connected" || s == "lc") return NetworkDesign::LocallyConnected;
    if (s == "fully_connected_log" || s == "fc") return NetworkDesign::FullyConnectedLog;
    throw std::invalid_argument("unknown network design '" + s + "'");
}

double HedgeNetwork::forward_normalized(const double* z) const {
    double out = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
        double a = b[j];
        const double* row = w1.data() + j * inputs;
        for (std::size_t k = 0; k < inputs; ++k) a += row[k] * z[k];
        if (a > 0.0) out += w2[j] * a;
    }
    return out;
}

double HedgeNetwork::forward(std::span<const double> z) const {
    if (z.size() != inputs)
        throw ContractError("network expects " + std::to_string(inputs) + " inputs, got " +
                                    std::to_string(z.size()));
    double zn[16];
    std::vector<double> big;
    double* p = zn;
    if (inputs > 16) {
        big.resize(inputs);
        p = big.data();
    }
    for (std::size_t k = 0; k < inputs; ++k) p[k] = (z[k] - mu_z[k]) / sigma_z[k];
    return sigma_v * forward_normalized(p);
}

std::pair<TrainingSet, Normalization> normalize(std::span<const double> raw_inputs,
                                                std::span<const double> raw_targets,
                                                std::size_t inputs) {
    const std::size_t n = raw_targets.size();
    if (n < 2) throw std::invalid_argument("normalization needs at least two samples");
    if (inputs == 0 || raw_inputs.size() != n * inputs)
        throw ContractError("input matrix does not match target count");

    Normalization norm;
    norm.mu_z.assign(inputs, 0.0);
    norm.sigma_z.assign(inputs, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < inputs; ++k) norm.mu_z[k] += raw_inputs[i * inputs + k];
    for (auto& m : norm.mu_z) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < inputs; ++k) {
            const double dz = raw_inputs[i * inputs + k] - norm.mu_z[k];
            norm.sigma_z[k] += dz * dz;
        }
    for (std::size_t k = 0; k < inputs; ++k) {
        norm.sigma_z[k] = std::sqrt(norm.sigma_z[k] / static_cast<double>(n - 1));
        if (!(norm.sigma_z[k] > 0.0) || !std::isfinite(norm.sigma_z[k]))
            throw std::domain_error("input column " + std::to_string(k) + " has zero spread");
    }

    double mean_v = std::accumulate(raw_targets.begin(), raw_targets.end(), 0.0) / n;
    double var_v = 0.0;
    for (double v : raw_targets) var_v += (v - mean_v) * (v - mean_v);
    norm.sigma_v = std::sqrt(var_v / static_cast<double>(n - 1));
    if (!(norm.sigma_v > 0.0)) norm.sigma_v = mean_v == 0.0 ? 1.0 : std::abs(mean_v);

    TrainingSet set;
    set.n = n;
    set.inputs = inputs;
    set.x.resize(n * inputs);
    set.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < inputs; ++k)
            set.x[i * inputs + k] = (raw_inputs[i * inputs + k] - norm.mu_z[k]) / norm.sigma_z[k];
        set.y[i] = raw_targets[i] / norm.sigma_v;
    }
    return {std::move(set), std::move(norm)};
}

void apply_normalization(HedgeNetwork& net, const Normalization& norm) {
    if (norm.mu_z.size() != net.inputs || norm.sigma_z.size() != net.inputs)
        throw ContractError("normalization does not match network inputs");
    net.mu_z = norm.mu_z;
    net.sigma_z = norm.sigma_z;
    net.sigma_v = norm.sigma_v;
}

HedgeNetwork initialize(NetworkDesign design, std::size_t q, std::size_t inputs,
                        const HedgeNetwork* prev, std::uint64_t seed) {
    if (q == 0 || inputs == 0) throw std::invalid_argument("network needs q >= 1 and inputs >= 1");
    if (design == NetworkDesign::OneFactor && inputs != 1)
        throw std::invalid_argument("one-factor design takes a single input");
    if (design == NetworkDesign::LocallyConnected && q % inputs != 0)
        throw std::invalid_argument("locally connected design needs q to be a multiple of inputs");
    if (prev) {
        if (prev->design != design || prev->q != q || prev->inputs != inputs)
            throw ContractError("warm start network has a different shape");
        return *prev;
    }

    HedgeNetwork net;
    net.design = design;
    net.q = q;
    net.inputs = inputs;
    net.w1.assign(q * inputs, 0.0);
    net.mask.assign(q * inputs, 1);
    net.b.resize(q);
    net.w2.resize(q);
    net.mu_z.assign(inputs, 0.0);
    net.sigma_z.assign(inputs, 1.0);
    net.sigma_v = 1.0;
    if (design == NetworkDesign::LocallyConnected) {
        std::fill(net.mask.begin(), net.mask.end(), 0);
        for (std::size_t j = 0; j < q; ++j)
            net.mask[j * inputs + HedgeNetwork::assigned_input(j, q, inputs)] = 1;
    }

    Xoshiro256 rng(seed);
    // b > 0 and w1 < 0 keep every node active at the input mean whatever the
    // option direction; the mirrored draw leaves most nodes alive only in the
    // upper tail of the standardized inputs.
    for (std::size_t j = 0; j < q; ++j) {
        for (std::size_t k = 0; k < inputs; ++k)
            if (net.mask[j * inputs + k]) net.w1[j * inputs + k] = rng.uniform(-1.0, 0.0);
        net.b[j] = rng.uniform(0.0, 1.0);
        net.w2[j] = rng.uniform(-1.0, 1.0);
    }
    return net;
}

double loss_and_gradient(const HedgeNetwork& net, const TrainingSet& data,
                         std::span<const std::size_t> idx, Gradient* grad) {
    const std::size_t q = net.q;
    const std::size_t d = net.inputs;
    if (data.inputs != d) throw ContractError("training data does not match network inputs");
    if (grad) {
        grad->w1.assign(q * d, 0.0);
        grad->b.assign(q, 0.0);
        grad->w2.assign(q, 0.0);
    }
    const std::size_t count = idx.empty() ? data.n : idx.size();
    std::vector<double> act(q);
    double loss = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t i = idx.empty() ? s : idx[s];
        const double* z = data.x.data() + i * d;
        double out = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            double a = net.b[j];
            const double* row = net.w1.data() + j * d;
            for (std::size_t k = 0; k < d; ++k) a += row[k] * z[k];
            act[j] = a;
            if (a > 0.0) out += net.w2[j] * a;
        }
        const double e = out - data.y[i];
        loss += e * e;
        if (!grad) continue;
        for (std::size_t j = 0; j < q; ++j) {
            if (!(act[j] > 0.0)) continue;
            grad->w2[j] += e * act[j];
            const double back = e * net.w2[j];
            grad->b[j] += back;
            double* g = grad->w1.data() + j * d;
            for (std::size_t k = 0; k < d; ++k) g[k] += back * z[k];
        }
    }
    const double scale = 1.0 / static_cast<double>(count);
    if (grad) {
        for (auto& g : grad->w2) g *= 2.0 * scale;
        for (auto& g : grad->b) g *= 2.0 * scale;
        for (std::size_t n = 0; n < grad->w1.size(); ++n)
            grad->w1[n] = net.mask[n] ? grad->w1[n] * 2.0 * scale : 0.0;
    }
    return loss * scale;
}

namespace {

struct AdaMaxState {
    std::vector<double> m, u;
    explicit AdaMaxState(std::size_t n) : m(n, 0.0), u(n, 0.0) {}
};

void adamax_step(std::vector<double>& theta, const std::vector<double>& g, AdaMaxState& st,
                 double step, const TrainOptions& o, const std::vector<unsigned char>* mask) {
    for (std::size_t n = 0; n < theta.size(); ++n) {
        if (mask && !(*mask)[n]) continue;
        st.m[n] = o.beta1 * st.m[n] + (1.0 - o.beta1) * g[n];
        st.u[n] = std::max(o.beta2 * st.u[n], std::abs(g[n]));
        theta[n] -= step * st.m[n] / (st.u[n] + o.epsilon);
    }
}

}  // namespace

TrainDiagnostics train(HedgeNetwork& net, const TrainingSet& data, const TrainOptions& opts) {
    if (data.n == 0) throw std::invalid_argument("empty training set");
    if (data.inputs != net.inputs) throw ContractError("training data does not match network");
    if (opts.batch == 0) throw std::invalid_argument("batch size must be positive");
    if (!(opts.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");

    AdaMaxState s_w1(net.w1.size()), s_b(net.b.size()), s_w2(net.w2.size());
    std::vector<std::size_t> order(data.n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Xoshiro256 rng(opts.seed, 0x5eed);
    Gradient grad;

    const double lr_final = opts.final_learning_rate > 0.0 ? opts.final_learning_rate : opts.learning_rate;
    const double decay =
        opts.epochs > 1 ? std::pow(lr_final / opts.learning_rate, 1.0 / static_cast<double>(opts.epochs - 1))
                        : 1.0;

    HedgeNetwork best = net;
    double best_mse = loss_and_gradient(net, data, {}, nullptr);
    std::vector<double> history{best_mse};
    std::size_t t = 0;
    std::size_t epoch = 0;
    double lr = opts.learning_rate;
    for (; epoch < opts.epochs; ++epoch) {
        if (opts.shuffle)
            for (std::size_t i = data.n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (std::size_t start = 0; start < data.n; start += opts.batch) {
            const std::size_t len = std::min(opts.batch, data.n - start);
            loss_and_gradient(net, data, std::span(order).subspan(start, len), &grad);
            ++t;
            const double step = lr / (1.0 - std::pow(opts.beta1, static_cast<double>(t)));
            adamax_step(net.w1, grad.w1, s_w1, step, opts, &net.mask);
            adamax_step(net.b, grad.b, s_b, step, opts, nullptr);
            adamax_step(net.w2, grad.w2, s_w2, step, opts, nullptr);
        }
        lr *= decay;
        const double mse = loss_and_gradient(net, data, {}, nullptr);
        if (!std::isfinite(mse))
            throw TrainingError("training loss became non-finite at epoch " + std::to_string(epoch + 1),
                                epoch + 1);
        if (mse < best_mse) {
            best_mse = mse;
            best = net;
        }
        history.push_back(best_mse);
        if (history.size() > opts.patience &&
            history[history.size() - 1 - opts.patience] - best_mse < opts.tolerance) {
            ++epoch;
            break;
        }
    }
    net = std::move(best);
    if (opts.refit_output && refit_output_layer(net, data)) best_mse = loss_and_gradient(net, data, {}, nullptr);

    TrainDiagnostics diag;
    diag.epochs = epoch;
    diag.normalized_mse = best_mse;
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        const double e = net.forward_normalized(data.x.data() + i * data.inputs) - data.y[i];
        abs_sum += std::abs(e);
    }
    diag.mse = best_mse * net.sigma_v * net.sigma_v;
    diag.mae = abs_sum / static_cast<double>(data.n) * net.sigma_v;
    return diag;
}

bool refit_output_layer(HedgeNetwork& net, const TrainingSet& data) {
    if (data.n == 0 || data.inputs != net.inputs) throw ContractError("training data does not match network");
    const auto q = static_cast<Eigen::Index>(net.q);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(q, q);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd h(q);
    for (std::size_t i = 0; i < data.n; ++i) {
        const double* z = data.x.data() + i * data.inputs;
        for (std::size_t j = 0; j < net.q; ++j) {
            double a = net.b[j];
            for (std::size_t k = 0; k < net.inputs; ++k) a += net.w1[j * net.inputs + k] * z[k];
            h[static_cast<Eigen::Index>(j)] = a > 0.0 ? a : 0.0;
        }
        gram.selfadjointView<Eigen::Lower>().rankUpdate(h);
        rhs += data.y[i] * h;
    }
    gram = gram.selfadjointView<Eigen::Lower>();
    // dead nodes give zero rows; a tiny ridge keeps the system solvable
    const double ridge = 1e-12 * std::max(gram.diagonal().maxCoeff(), 1.0);
    gram.diagonal().array() += ridge;
    const Eigen::VectorXd w2 = gram.ldlt().solve(rhs);
    if (!w2.allFinite()) return false;

    const double before = loss_and_gradient(net, data, {}, nullptr);
    HedgeNetwork trial = net;
    for (std::size_t j = 0; j < net.q; ++j) trial.w2[j] = w2[static_cast<Eigen::Index>(j)];
    if (!(loss_and_gradient(trial, data, {}, nullptr) < before)) return false;
    net = std::move(trial);
    return true;
}

EffectiveWeights denormalized_portfolio_weights(const HedgeNetwork& net) {
    EffectiveWeights e;
    e.q = net.q;
    e.inputs = net.inputs;
    e.w1.resize(net.w1.size());
    e.b.resize(net.q);
    e.w2.resize(net.q);
    for (std::size_t j = 0; j < net.q; ++j) {
        double bias = net.b[j];
        for (std::size_t k = 0; k < net.inputs; ++k) {
            const double w = net.w1[j * net.inputs + k];
            e.w1[j * net.inputs + k] = w / net.sigma_z[k];
            bias -= w * net.mu_z[k] / net.sigma_z[k];
        }
        e.b[j] = bias;
        e.w2[j] = net.sigma_v * net.w2[j];
    }
    return e;
}

namespace {

void write_values(std::ostream& out, const char* key, std::span<const double> v) {
    out << key;
    for (double x : v) out << ' ' << std::hexfloat << x << std::defaultfloat;
    out << '\n';
}

std::vector<double> read_values(std::istream& in, const char* key, std::size_t n) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(std::string("missing '") + key + "' line");
    std::istringstream ls(line);
    std::string k;
    ls >> k;
    if (k != key) throw IoError(std::string("expected '") + key + "', got '" + k + "'");
    std::vector<double> v;
    std::string tok;
    while (ls >> tok) v.push_back(std::strtod(tok.c_str(), nullptr));
    if (v.size() != n)
        throw IoError(std::string("'") + key + "' has " + std::to_string(v.size()) +
                                 " values, expected " + std::to_string(n));
    return v;
}

}  // namespace

void write_network(std::ostream& out, const HedgeNetwork& net) {
    out << "network 1\n";
    out << "design " << to_string(net.design) << '\n';
    out << "q " << net.q << '\n';
    out << "inputs " << net.inputs << '\n';
    out << "sigma_v " << std::hexfloat << net.sigma_v << std::defaultfloat << '\n';
    write_values(out, "mu_z", net.mu_z);
    write_values(out, "sigma_z", net.sigma_z);
    write_values(out, "w1", net.w1);
    write_values(out, "b", net.b);
    write_values(out, "w2", net.w2);
    out << "mask";
    for (unsigned char m : net.mask) out << ' ' << static_cast<int>(m);
    out << '\n';
}

HedgeNetwork read_network(std::istream& in) {
    auto field = [&](const char* key) {
        std::string line, k, value;
        if (!std::getline(in, line)) throw IoError(std::string("missing '") + key + "'");
        std::istringstream ls(line);
        ls >> k >> value;
        if (k != key) throw IoError(std::string("expected '") + key + "', got '" + k + "'");
        return value;
    };
    if (field("network") != "1") throw IoError("unsupported network record version");
    HedgeNetwork net;
    net.design = design_from_string(field("design"));
    net.q = std::stoul(field("q"));
    net.inputs = std::stoul(field("inputs"));
    net.sigma_v = std::strtod(field("sigma_v").c_str(), nullptr);
    net.mu_z = read_values(in, "mu_z", net.inputs);
    net.sigma_z = read_values(in, "sigma_z", net.inputs);
    net.w1 = read_values(in, "w1", net.q * net.inputs);
    net.b = read_values(in, "b", net.q);
    net.w2 = read_values(in, "w2", net.q);
    std::string line;
    if (!std::getline(in, line)) throw IoError("missing 'mask'");
    std::istringstream ls(line);
    std::string k;
    ls >> k;
    if (k != "mask") throw IoError("expected 'mask'");
    int m;
    while (ls >> m) net.mask.push_back(static_cast<unsigned char>(m != 0));
    if (net.mask.size() != net.q * net.inputs) throw IoError("mask has the wrong size");
    return net;
}

}  // namespace bermudan
