#include "bermudan/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bermudan/errors.hpp"
#include "bermudan/parallel.hpp"
#include "bermudan/random.hpp"

namespace bermudan {

std::uint64_t training_path_seed(std::uint64_t seed) { return derive_seed(seed, 101); }

namespace {

std::uint64_t init_seed(std::uint64_t seed) { return derive_seed(seed, 102); }
std::uint64_t shuffle_seed(std::uint64_t seed, std::size_t m) { return derive_seed(seed, 200 + m); }

std::vector<double> monitor_dates(const BermudanSpec& spec) {
    return {spec.dates.begin(), spec.dates.begin() + static_cast<std::ptrdiff_t>(spec.exercise_count())};
}

GaussianModel sampling_model(const GaussianModel& model, double scale) {
    if (scale == 1.0) return model;
    std::vector<double> a(model.factors()), vol(model.factors()), corr(model.factors() * model.factors());
    for (std::size_t i = 0; i < model.factors(); ++i) {
        a[i] = model.mean_reversion(i);
        vol[i] = model.vol(i) * scale;
        for (std::size_t j = 0; j < model.factors(); ++j) corr[i * model.factors() + j] = model.correlation(i, j);
    }
    return GaussianModel(a, vol, corr, model.f0());
}

}  // namespace

HedgeSet fit_hedge(const GaussianModel& model, const BermudanSpec& spec, const TrainConfig& cfg,
                   std::uint64_t seed) {
    validate(spec);
    if (cfg.design == NetworkDesign::OneFactor && model.factors() != 1)
        throw std::invalid_argument("one-factor design needs a one-factor model");
    if (cfg.n_paths < 2) throw std::invalid_argument("need at least two training paths");
    if (!(cfg.domain_scale > 0.0)) throw std::invalid_argument("domain_scale must be positive");
    if (!(cfg.wide_fraction >= 0.0 && cfg.wide_fraction <= 1.0))
        throw std::invalid_argument("wide_fraction must lie in [0, 1]");

    const std::size_t K = spec.exercise_count();
    const double TM = spec.maturity();
    const std::vector<double> dates = monitor_dates(spec);
    const std::size_t N = cfg.n_paths;
    const std::size_t d = model.factors();
    const auto n_wide = static_cast<std::size_t>(std::llround(cfg.wide_fraction * static_cast<double>(N)));
    // states[m] holds x(T_m) row-wise for every training path
    std::vector<std::vector<double>> states(K, std::vector<double>(N * d));
    auto collect = [&](const GaussianModel& sampler, std::size_t count, std::uint64_t s, std::size_t offset) {
        if (count == 0) return;
        const PathSet ps = simulate_observed(sampler, dates, cfg.dt, count, cfg.measure, s, TM);
        for (std::size_t m = 0; m < K; ++m) {
            const std::size_t ti = ps.time_index(dates[m]);
            for (std::size_t p = 0; p < count; ++p) {
                const auto x = ps.state(p, ti);
                std::copy(x.begin(), x.end(), states[m].begin() + static_cast<std::ptrdiff_t>((offset + p) * d));
            }
        }
    };
    collect(model, N - n_wide, training_path_seed(seed), 0);
    collect(sampling_model(model, cfg.domain_scale), n_wide, derive_seed(training_path_seed(seed), 1),
            N - n_wide);
    const double p0 = std::exp(-model.f0() * TM);

    HedgeSet hedge;
    hedge.spec = spec;
    hedge.config = cfg;
    hedge.seed = seed;
    hedge.networks.resize(K);
    hedge.diagnostics.resize(K);
    for (std::size_t m = 0; m < K; ++m)
        hedge.inputs.push_back(make_input_map(model, cfg.design, dates[m], TM, cfg.n_inputs));

    std::vector<double> targets(N), z;
    for (std::size_t m = K; m-- > 0;) {
        const double* xs = states[m].data();
        const InputMap& in = hedge.inputs[m];
        const std::size_t nin = in.size();
        const ExercisePayoff payoff(model, spec, m);
        z.assign(N * nin, 0.0);

        std::optional<PortfolioPricer> next;
        if (m + 1 < K) next.emplace(model, hedge.networks[m + 1], hedge.inputs[m + 1], dates[m]);
        std::atomic<bool> finite{true};
        parallel_for(N, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                const std::span<const double> x(xs + p * d, d);
                in.evaluate(x, z.data() + p * nin);
                const double h = payoff(x);
                const double c = next ? next->value(x) : 0.0;
                targets[p] = std::max(c, h);
                if (!std::isfinite(targets[p])) finite = false;
            }
        });
        if (!finite)
            throw NumericError("non-finite continuation value at date index " + std::to_string(m));

        auto [data, norm] = normalize(z, targets, nin);
        HedgeNetwork net = initialize(cfg.design, cfg.q, nin,
                                      m + 1 < K ? &hedge.networks[m + 1] : nullptr, init_seed(seed));
        apply_normalization(net, norm);
        TrainOptions opts = cfg.optimizer;
        opts.seed = shuffle_seed(seed, m);
        TrainDiagnostics td;
        try {
            td = train(net, data, opts);
        } catch (const TrainingError& e) {
            throw TrainingError("date index " + std::to_string(m) + ": " + e.what(), e.epoch());
        }

        // deflated by P(T_m, T_M) and scaled back to time 0
        const BondCoeffs to_maturity = bond_coeffs(model, dates[m], TM);
        double disc = 0.0;
        for (std::size_t p = 0; p < N; ++p) {
            const double err =
                std::abs(net.forward_normalized(data.x.data() + p * nin) * net.sigma_v - targets[p]);
            disc += err / to_maturity.price(std::span<const double>(xs + p * d, d));
        }
        disc *= p0 / static_cast<double>(N);

        auto& dg = hedge.diagnostics[m];
        dg.index = m;
        dg.date = dates[m];
        dg.mse = td.mse;
        dg.mae = td.mae;
        dg.discounted_mae = disc;
        dg.epochs = td.epochs;
        hedge.networks[m] = std::move(net);
    }

    const std::vector<double> x0(model.factors(), 0.0);
    hedge.direct_estimate = portfolio_value(model, 0.0, x0, hedge.networks[0], hedge.inputs[0]);
    return hedge;
}

void attach_model(HedgeSet& hedge, const GaussianModel& model) {
    const std::size_t K = hedge.spec.exercise_count();
    if (hedge.networks.size() != K) throw ContractError("network count does not match contract");
    for (const auto& net : hedge.networks)
        if (net.design == NetworkDesign::OneFactor && model.factors() != 1)
            throw ContractError("one-factor network attached to a multi-factor model");
    hedge.inputs.clear();
    for (std::size_t m = 0; m < K; ++m)
        hedge.inputs.push_back(make_input_map(model, hedge.networks[m].design, hedge.spec.dates[m],
                                              hedge.spec.maturity(), hedge.networks[m].inputs));
    const std::vector<double> x0(model.factors(), 0.0);
    hedge.direct_estimate = portfolio_value(model, 0.0, x0, hedge.networks[0], hedge.inputs[0]);
}

ErrorMargins error_margins(const HedgeSet& hedge) {
    ErrorMargins e;
    for (const auto& d : hedge.diagnostics) e.epsilon = std::max(e.epsilon, d.discounted_mae);
    const double M = static_cast<double>(hedge.diagnostics.size());
    e.direct = M * e.epsilon;
    e.lower = 2.0 * (M - 1.0) * e.epsilon;
    e.upper = M * (M - 1.0) * e.epsilon;
    return e;
}

void write_diagnostics_csv(std::ostream& out, const HedgeSet& hedge) {
    const auto old = out.precision(17);
    out << "date_index,date,mse,mae,discounted_mae,epochs\n";
    for (const auto& d : hedge.diagnostics)
        out << d.index << ',' << d.date << ',' << d.mse << ',' << d.mae << ',' << d.discounted_mae
            << ',' << d.epochs << '\n';
    out.precision(old);
}

void write_hedge_set(std::ostream& out, const HedgeSet& hedge) {
    const auto& s = hedge.spec;
    out << "hedge_set 1\n";
    out << "style " << (s.style == ExerciseStyle::European ? "european" : "bermudan") << '\n';
    out << "direction " << s.direction << '\n';
    out << std::hexfloat;
    out << "notional " << s.notional << '\n';
    out << "strike " << s.strike << '\n';
    out << "dates";
    for (double t : s.dates) out << ' ' << t;
    out << '\n';
    out << "direct " << hedge.direct_estimate << '\n';
    out << std::defaultfloat;
    out << "seed " << hedge.seed << '\n';
    out << "networks " << hedge.networks.size() << '\n';
    for (std::size_t m = 0; m < hedge.networks.size(); ++m) {
        const auto& d = hedge.diagnostics.at(m);
        out << "diagnostics " << d.index << ' ' << std::hexfloat << d.date << ' ' << d.mse << ' '
            << d.mae << ' ' << d.discounted_mae << std::defaultfloat << ' ' << d.epochs << '\n';
        write_network(out, hedge.networks[m]);
    }
}

HedgeSet read_hedge_set(std::istream& in, const GaussianModel& model) {
    auto line_of = [&](const char* key) {
        std::string line, k;
        if (!std::getline(in, line)) throw IoError(std::string("missing '") + key + "'");
        std::istringstream ls(line);
        ls >> k;
        if (k != key) throw IoError(std::string("expected '") + key + "', got '" + k + "'");
        std::string rest;
        std::getline(ls, rest);
        return rest;
    };
    auto num = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };
    if (std::stoi(line_of("hedge_set")) != 1) throw IoError("unsupported hedge set version");
    HedgeSet h;
    const std::string style = line_of("style");
    h.spec.style = style.find("european") != std::string::npos ? ExerciseStyle::European
                                                                : ExerciseStyle::Bermudan;
    h.spec.direction = std::stoi(line_of("direction"));
    h.spec.notional = num(line_of("notional"));
    h.spec.strike = num(line_of("strike"));
    {
        std::istringstream ls(line_of("dates"));
        std::string tok;
        while (ls >> tok) h.spec.dates.push_back(num(tok));
    }
    validate(h.spec);
    const double direct = num(line_of("direct"));
    h.seed = std::stoull(line_of("seed"));
    const std::size_t n = std::stoul(line_of("networks"));
    for (std::size_t m = 0; m < n; ++m) {
        std::istringstream ls(line_of("diagnostics"));
        DateDiagnostics d;
        std::string a, b, c, e;
        ls >> d.index >> a >> b >> c >> e >> d.epochs;
        d.date = num(a);
        d.mse = num(b);
        d.mae = num(c);
        d.discounted_mae = num(e);
        h.diagnostics.push_back(d);
        h.networks.push_back(read_network(in));
    }
    if (!h.networks.empty()) {
        h.config.design = h.networks[0].design;
        h.config.q = h.networks[0].q;
        h.config.n_inputs = h.networks[0].inputs;
    }
    attach_model(h, model);
    h.direct_estimate = direct;
    return h;
}

}  // namespace bermudan
