#include "experiments.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>

namespace cli {

namespace fs = std::filesystem;

namespace {

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};

using Model = std::unique_ptr<bh_model, Deleter<bh_model, bh_model_free>>;
using Contract = std::unique_ptr<bh_contract, Deleter<bh_contract, bh_contract_free>>;
using Hedge = std::unique_ptr<bh_hedge, Deleter<bh_hedge, bh_hedge_free>>;
using Bounds = std::unique_ptr<bh_bounds, Deleter<bh_bounds, bh_bounds_free>>;
using Report = std::unique_ptr<bh_hedge_report, Deleter<bh_hedge_report, bh_report_free>>;

class Csv {
public:
    Csv(const fs::path& dir, const std::string& name, const std::string& header, std::vector<std::string>& written)
        : path_(dir / name), out_(path_) {
        if (!out_) throw RunError("cli", BH_ERR_IO, "cannot write " + path_.string());
        out_ << header << '\n';
        written.push_back(name);
    }

    Csv& operator<<(double v) { return cell(std::isfinite(v) ? format_double(v) : "NA"); }
    Csv& operator<<(std::size_t v) { return cell(std::to_string(v)); }
    Csv& operator<<(const std::string& v) { return cell(v); }
    Csv& operator<<(const char* v) { return cell(v); }

    void end() {
        out_ << '\n';
        first_ = true;
    }

private:
    Csv& cell(const std::string& s) {
        if (!first_) out_ << ',';
        out_ << s;
        first_ = false;
        return *this;
    }

    fs::path path_;
    std::ofstream out_;
    bool first_ = true;
};

const double NA = std::nan("");

Model make_model(const ModelConfig& m) {
    bh_model* p = nullptr;
    check(bh_model_gaussian(m.d, m.a.data(), m.sigma.data(), m.rho.data(), m.f0, &p), "termstructure");
    return Model(p);
}

struct Priced {
    Contract contract;
    double moneyness;
    double strike;
};

// One contract per moneyness level, strikes set from the time-zero swap rate.
std::vector<Priced> make_contracts(const Config& cfg, const bh_model* model, bool bermudan) {
    const auto& k = cfg.contract;
    std::vector<Priced> out;
    for (double mny : k.moneyness) {
        bh_contract* c = nullptr;
        check(bh_contract_new(bermudan ? BH_BERMUDAN : BH_EUROPEAN, k.payer, k.notional, k.strike > 0 ? k.strike : 0.03,
                              k.start, k.end, k.frequency, &c),
              "instruments");
        Contract contract(c);
        double strike = k.strike;
        if (strike <= 0) {
            double s = 0.0;
            check(bh_contract_swap_rate(model, c, &s), "instruments");
            strike = mny * s;
            check(bh_contract_set_strike(c, strike), "instruments");
        }
        out.push_back({std::move(contract), k.strike > 0 ? NA : mny, strike});
    }
    return out;
}

const char* type_name(const Config& cfg) { return cfg.contract.payer ? "payer" : "receiver"; }
const char* style_name(bool bermudan) { return bermudan ? "bermudan" : "european"; }

std::string tag(std::size_t i) { return "k" + std::to_string(i); }

Hedge fit(const bh_model* model, const bh_contract* contract, const bh_train_config& training, std::uint64_t seed) {
    bh_hedge* h = nullptr;
    check(bh_hedge_fit(model, contract, &training, seed, &h), "engine");
    return Hedge(h);
}

Hedge fit_or_load(const Config& cfg, const bh_model* model, const bh_contract* contract) {
    if (cfg.hedge_file.empty()) return fit(model, contract, cfg.training, cfg.seed);
    if (cfg.contract.moneyness.size() != 1)
        throw RunError("cli", BH_ERR_INVALID_ARGUMENT, "hedge_file needs exactly one moneyness level");
    bh_hedge* h = nullptr;
    check(bh_hedge_load(model, cfg.hedge_file.c_str(), &h), "engine");
    return Hedge(h);
}

double jamshidian_or_na(const Config& cfg, const bh_model* model, const bh_contract* contract) {
    if (cfg.model.d != 1) return NA;
    double v = NA;
    check(bh_jamshidian(model, contract, &v), "benchmarks");
    return v;
}

void write_diagnostics(Csv& csv, const bh_hedge* hedge, double moneyness, std::size_t q) {
    for (std::size_t m = 0; m < bh_hedge_dates(hedge); ++m) {
        bh_date_diagnostics d{};
        check(bh_hedge_diagnostics(hedge, m, &d), "engine");
        csv << moneyness << q << d.index << d.date << d.mse << d.mae << d.discounted_mae << d.epochs;
        csv.end();
    }
}

void price(const Config& cfg, const bh_model* model, const fs::path& out, std::vector<std::string>& written) {
    const bool bermudan = cfg.contract.bermudan;
    Csv results(out, "results.csv",
                "type,style,moneyness,strike,direct,lb,lb_se,ub,ub_se,gap,epsilon,margin_lower,margin_upper,jamshidian",
                written);
    Csv diag(out, "diagnostics.csv", "moneyness,nodes,date_index,date,mse,mae,discounted_mae,epochs", written);
    auto contracts = make_contracts(cfg, model, bermudan);
    for (std::size_t i = 0; i < contracts.size(); ++i) {
        const auto& c = contracts[i];
        auto hedge = fit_or_load(cfg, model, c.contract.get());
        bh_bounds* b = nullptr;
        check(bh_bounds_estimate(hedge.get(), &cfg.bounds, &b), "bounds");
        Bounds bounds(b);
        bh_bound_summary s{};
        bh_bounds_summary(bounds.get(), &s);
        bh_margins mg{};
        check(bh_hedge_margins(hedge.get(), &mg), "engine");
        results << type_name(cfg) << style_name(bermudan) << c.moneyness << c.strike << bh_hedge_direct(hedge.get())
                << s.lower << s.lower_se << s.upper << s.upper_se << s.upper - s.lower << mg.epsilon << mg.lower
                << mg.upper << (bermudan ? NA : jamshidian_or_na(cfg, model, c.contract.get()));
        results.end();
        write_diagnostics(diag, hedge.get(), c.moneyness, cfg.training.q);

        const std::string name = "hedge_" + tag(i) + ".txt";
        check(bh_hedge_save(hedge.get(), (out / name).c_str()), "engine");
        written.push_back(name);
        const std::string pname = "portfolio_" + tag(i) + ".csv";
        check(bh_hedge_write_portfolio_csv(hedge.get(), (out / pname).c_str()), "portfolio");
        written.push_back(pname);
    }
}

void bounds(const Config& cfg, const bh_model* model, const fs::path& out, std::vector<std::string>& written) {
    const bool bermudan = cfg.contract.bermudan;
    Csv runs(out, "bounds_runs.csv", "type,style,moneyness,run,direct,lb,lb_se,ub,ub_se,gap,exercise_rate", written);
    Csv inc(out, "increments.csv", "moneyness,run,date_index,mean,se", written);
    auto contracts = make_contracts(cfg, model, bermudan);
    for (std::size_t i = 0; i < contracts.size(); ++i) {
        const auto& c = contracts[i];
        auto hedge = fit_or_load(cfg, model, c.contract.get());
        bh_bounds* b = nullptr;
        check(bh_bounds_estimate(hedge.get(), &cfg.bounds, &b), "bounds");
        Bounds bounds(b);
        for (std::size_t r = 0; r < cfg.bounds.n_runs; ++r) {
            bh_bound_run run{};
            check(bh_bounds_run(bounds.get(), r, &run), "bounds");
            runs << type_name(cfg) << style_name(bermudan) << c.moneyness << r << bh_hedge_direct(hedge.get())
                 << run.lower << run.lower_se << run.upper << run.upper_se << run.upper - run.lower
                 << run.exercise_rate;
            runs.end();
            for (std::size_t m = 0; m < bh_hedge_dates(hedge.get()); ++m) {
                double mean = 0, se = 0;
                check(bh_bounds_increment(bounds.get(), r, m, &mean, &se), "bounds");
                inc << c.moneyness << r << m << mean << se;
                inc.end();
            }
        }
    }
}

void benchmark(const Config& cfg, const bh_model* model, const fs::path& out, std::vector<std::string>& written) {
    const bool bermudan = cfg.contract.bermudan;
    Csv csv(out, "benchmark.csv",
            "type,style,moneyness,strike,lsm,lsm_se,lsm_ci_low,lsm_ci_high,mc_european,mc_european_se,jamshidian",
            written);
    auto contracts = make_contracts(cfg, model, bermudan);
    bh_lsm_options lo{};
    bh_lsm_options_default(&lo);
    lo.n_paths = cfg.benchmark.lsm_paths;
    lo.n_runs = cfg.benchmark.lsm_runs;
    lo.seed = cfg.benchmark.lsm_seed;
    lo.out_of_sample = cfg.benchmark.out_of_sample;
    for (auto& c : contracts) {
        bh_lsm_result lsm{NA, NA, NA, NA, 0, 0};
        if (bermudan) check(bh_lsm_price(model, c.contract.get(), &lo, &lsm), "benchmarks");
        if (lsm.n_warnings) std::cerr << "warning: LSM regression reported " << lsm.n_warnings << " issue(s)\n";
        double mc = NA, mc_se = NA, jam = NA;
        if (!bermudan) {
            check(bh_mc_european(model, c.contract.get(), cfg.benchmark.mc_paths, cfg.seed, &mc, &mc_se), "benchmarks");
            jam = jamshidian_or_na(cfg, model, c.contract.get());
        }
        csv << type_name(cfg) << style_name(bermudan) << c.moneyness << c.strike << lsm.price << lsm.se << lsm.ci_low
            << lsm.ci_high << mc << mc_se << jam;
        csv.end();
    }
}

void hedge(const Config& cfg, const bh_model* model, const fs::path& out, std::vector<std::string>& written) {
    std::vector<std::string> strategies = cfg.hedge.strategies;
    if (strategies.empty()) {
        if (cfg.contract.bermudan) strategies = {"semistatic"};
        else if (cfg.model.d == 1) strategies = {"static", "dynamic"};
        else strategies = {"static"};
    }
    bh_train_config training = cfg.training;
    training.domain_scale = cfg.hedge.domain_scale;
    training.wide_fraction = cfg.hedge.wide_fraction;

    Csv csv(out, "hedge.csv", "strategy,moneyness,paths,mean_bp,sd_bp,p95_bp,p95_abs_bp", written);
    // hedge paths use a stream distinct from training and bound paths
    const std::uint64_t path_seed = cfg.seed + 1000003;
    for (const auto& strategy : strategies) {
        const bool bermudan = strategy == "semistatic";
        auto contracts = make_contracts(cfg, model, bermudan);
        for (std::size_t i = 0; i < contracts.size(); ++i) {
            const auto& c = contracts[i];
            bh_hedge_report* r = nullptr;
            if (strategy == "dynamic") {
                check(bh_hedge_error_dynamic(model, c.contract.get(), cfg.hedge.rebalances, cfg.hedge.paths, path_seed, &r),
                      "hedging");
            } else {
                auto h = fit(model, c.contract.get(), training, cfg.seed);
                if (bermudan)
                    check(bh_hedge_error_semistatic(h.get(), cfg.hedge.paths, path_seed, cfg.hedge.discounted, &r),
                          "hedging");
                else
                    check(bh_hedge_error_static(h.get(), cfg.hedge.paths, path_seed, &r), "hedging");
            }
            Report report(r);
            bh_hedge_summary s{};
            bh_report_summary(report.get(), &s);
            csv << strategy << c.moneyness << s.n_paths << s.mean << s.sd << s.p95 << s.p95_abs;
            csv.end();
            if (cfg.hedge.dump_errors) {
                const std::string name = "errors_" + strategy + "_" + tag(i) + ".csv";
                check(bh_report_write_errors_csv(report.get(), (out / name).c_str()), "hedging");
                written.push_back(name);
            }
        }
    }
}

void sweep(const Config& cfg, const bh_model* model, const fs::path& out, std::vector<std::string>& written) {
    const bool bermudan = cfg.contract.bermudan;
    const char* design = cfg.training.design == BH_DESIGN_ONE_FACTOR        ? "one_factor"
                         : cfg.training.design == BH_DESIGN_LOCALLY_CONNECTED ? "locally_connected"
                                                                               : "fully_connected_log";
    Csv csv(out, "sweep.csv",
            "design,moneyness,nodes,direct,lsm,lsm_ci_low,lsm_ci_high,error,epsilon,lb,lb_se,ub,ub_se", written);
    Csv mae(out, "sweep_mae.csv", "moneyness,nodes,date_index,date,mse,mae,discounted_mae,epochs", written);
    auto contracts = make_contracts(cfg, model, bermudan);
    bh_lsm_options lo{};
    bh_lsm_options_default(&lo);
    lo.n_paths = cfg.benchmark.lsm_paths;
    lo.n_runs = cfg.benchmark.lsm_runs;
    lo.seed = cfg.benchmark.lsm_seed;
    lo.out_of_sample = cfg.benchmark.out_of_sample;
    for (auto& c : contracts) {
        // the reference is LSM for Bermudans and Jamshidian (or MC) for Europeans
        double ref = NA, lo95 = NA, hi95 = NA;
        if (bermudan) {
            bh_lsm_result lsm{};
            check(bh_lsm_price(model, c.contract.get(), &lo, &lsm), "benchmarks");
            ref = lsm.price;
            lo95 = lsm.ci_low;
            hi95 = lsm.ci_high;
        } else if (cfg.model.d == 1) {
            ref = jamshidian_or_na(cfg, model, c.contract.get());
        } else {
            double se = 0;
            check(bh_mc_european(model, c.contract.get(), cfg.benchmark.mc_paths, cfg.seed, &ref, &se), "benchmarks");
            lo95 = ref - 1.96 * se;
            hi95 = ref + 1.96 * se;
        }
        for (std::size_t q : cfg.sweep.nodes) {
            bh_train_config t = cfg.training;
            t.q = q;
            auto h = fit(model, c.contract.get(), t, cfg.seed);
            bh_margins mg{};
            check(bh_hedge_margins(h.get(), &mg), "engine");
            bh_bound_summary s{NA, NA, NA, NA, 0, 0};
            if (cfg.sweep.bounds) {
                bh_bounds* b = nullptr;
                check(bh_bounds_estimate(h.get(), &cfg.bounds, &b), "bounds");
                Bounds bounds(b);
                bh_bounds_summary(bounds.get(), &s);
            }
            const double direct = bh_hedge_direct(h.get());
            csv << design << c.moneyness << q << direct << ref << lo95 << hi95 << direct - ref << mg.epsilon << s.lower
                << s.lower_se << s.upper << s.upper_se;
            csv.end();
            write_diagnostics(mae, h.get(), c.moneyness, q);
        }
    }
}

}  // namespace

std::vector<std::string> run_experiments(const Config& cfg, const fs::path& out) {
    std::vector<std::string> written;
    if (cfg.experiments.empty()) return written;
    auto model = make_model(cfg.model);
    for (const auto& e : cfg.experiments) {
        std::cerr << "running " << e << '\n';
        if (e == "price") price(cfg, model.get(), out, written);
        else if (e == "bounds") bounds(cfg, model.get(), out, written);
        else if (e == "benchmark") benchmark(cfg, model.get(), out, written);
        else if (e == "hedge") hedge(cfg, model.get(), out, written);
        else if (e == "sweep") sweep(cfg, model.get(), out, written);
        else throw RunError("cli", BH_ERR_INVALID_ARGUMENT, "unknown experiment '" + e + "'");
    }
    return written;
}

}  // namespace cli
