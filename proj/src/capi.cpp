#include "bermudan/bermudan.h"

#include <fstream>
#include <new>
#include <stdexcept>
#include <string>

#include "bermudan/benchmarks.hpp"
#include "bermudan/bounds.hpp"
#include "bermudan/engine.hpp"
#include "bermudan/errors.hpp"
#include "bermudan/hedging.hpp"
#include "bermudan/parallel.hpp"

using namespace bermudan;

struct bh_model {
    GaussianModel model;
};

struct bh_contract {
    BermudanSpec spec;
};

struct bh_hedge {
    GaussianModel model;
    HedgeSet set;
};

struct bh_bounds {
    BoundReport report;
};

struct bh_hedge_report {
    HedgeErrorReport report;
};

namespace {

thread_local std::string last_error;

bh_status fail(bh_status s, const char* what) {
    last_error = what;
    return s;
}

// Runs body and maps exceptions onto status codes. Order matters: the
// library's own types derive from the std ones.
template <class F>
bh_status guard(F&& body) {
    try {
        body();
        return BH_OK;
    } catch (const TrainingError& e) {
        return fail(BH_ERR_TRAINING, e.what());
    } catch (const ContractError& e) {
        return fail(BH_ERR_CONTRACT, e.what());
    } catch (const NumericError& e) {
        return fail(BH_ERR_NUMERIC, e.what());
    } catch (const IoError& e) {
        return fail(BH_ERR_IO, e.what());
    } catch (const std::domain_error& e) {
        return fail(BH_ERR_DOMAIN, e.what());
    } catch (const std::out_of_range& e) {
        return fail(BH_ERR_DOMAIN, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(BH_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(BH_ERR_UNKNOWN, "out of memory");
    } catch (const std::exception& e) {
        return fail(BH_ERR_UNKNOWN, e.what());
    } catch (...) {
        return fail(BH_ERR_UNKNOWN, "unknown exception");
    }
}

void require(const void* p, const char* name) {
    if (!p) throw std::invalid_argument(std::string(name) + " is null");
}

NetworkDesign to_design(bh_design d) {
    switch (d) {
        case BH_DESIGN_ONE_FACTOR: return NetworkDesign::OneFactor;
        case BH_DESIGN_LOCALLY_CONNECTED: return NetworkDesign::LocallyConnected;
        case BH_DESIGN_FULLY_CONNECTED_LOG: return NetworkDesign::FullyConnectedLog;
    }
    throw std::invalid_argument("unknown network design");
}

bh_design from_design(NetworkDesign d) {
    switch (d) {
        case NetworkDesign::OneFactor: return BH_DESIGN_ONE_FACTOR;
        case NetworkDesign::LocallyConnected: return BH_DESIGN_LOCALLY_CONNECTED;
        case NetworkDesign::FullyConnectedLog: return BH_DESIGN_FULLY_CONNECTED_LOG;
    }
    return BH_DESIGN_ONE_FACTOR;
}

Measure to_measure(bh_measure m) {
    switch (m) {
        case BH_MEASURE_RISK_NEUTRAL: return Measure::RiskNeutral;
        case BH_MEASURE_FORWARD: return Measure::ForwardTM;
    }
    throw std::invalid_argument("unknown measure");
}

TrainConfig to_config(const bh_train_config& c) {
    TrainConfig t;
    t.n_paths = c.n_paths;
    t.q = c.q;
    t.design = to_design(c.design);
    t.n_inputs = c.n_inputs;
    t.dt = c.dt;
    t.measure = to_measure(c.measure);
    t.domain_scale = c.domain_scale;
    t.wide_fraction = c.wide_fraction;
    t.optimizer.epochs = c.epochs;
    t.optimizer.batch = c.batch;
    t.optimizer.learning_rate = c.learning_rate;
    t.optimizer.final_learning_rate = c.final_learning_rate;
    t.optimizer.tolerance = c.tolerance;
    t.optimizer.patience = c.patience;
    t.optimizer.shuffle = c.shuffle != 0;
    t.optimizer.refit_output = c.refit_output != 0;
    return t;
}

std::ofstream open_out(const char* path) {
    require(path, "path");
    std::ofstream out(path);
    if (!out) throw IoError(std::string("cannot open ") + path + " for writing");
    return out;
}

void finish(std::ofstream& out, const char* path) {
    out.flush();
    if (!out) throw IoError(std::string("write failed: ") + path);
}

}  // namespace

extern "C" {

const char* bh_version(void) { return "0.1.0"; }

const char* bh_last_error(void) { return last_error.c_str(); }

const char* bh_status_name(bh_status status) {
    switch (status) {
        case BH_OK: return "ok";
        case BH_ERR_INVALID_ARGUMENT: return "invalid argument";
        case BH_ERR_DOMAIN: return "domain error";
        case BH_ERR_CONTRACT: return "contract error";
        case BH_ERR_NUMERIC: return "numeric error";
        case BH_ERR_TRAINING: return "training error";
        case BH_ERR_IO: return "io error";
        case BH_ERR_UNKNOWN: return "unknown error";
    }
    return "unknown error";
}

void bh_set_threads(unsigned n) { set_thread_count(n); }

unsigned bh_threads(void) { return thread_count(); }

bh_status bh_model_hull_white(double a, double sigma, double f0, bh_model** out) {
    return guard([&] {
        require(out, "out");
        *out = new bh_model{GaussianModel::hull_white(a, sigma, f0)};
    });
}

bh_status bh_model_g2pp(double a1, double a2, double sigma1, double sigma2, double rho, double f0,
                        bh_model** out) {
    return guard([&] {
        require(out, "out");
        *out = new bh_model{GaussianModel::g2pp(a1, a2, sigma1, sigma2, rho, f0)};
    });
}

bh_status bh_model_gaussian(size_t d, const double* a, const double* sigma, const double* rho,
                            double f0, bh_model** out) {
    return guard([&] {
        require(out, "out");
        require(a, "a");
        require(sigma, "sigma");
        require(rho, "rho");
        if (d == 0) throw std::invalid_argument("model needs at least one factor");
        *out = new bh_model{GaussianModel(std::vector<double>(a, a + d), std::vector<double>(sigma, sigma + d),
                                          std::vector<double>(rho, rho + d * d), f0)};
    });
}

size_t bh_model_factors(const bh_model* model) { return model ? model->model.factors() : 0; }

bh_status bh_model_bond_price(const bh_model* model, double t, double T, const double* x, double* out) {
    return guard([&] {
        require(model, "model");
        require(x, "x");
        require(out, "out");
        *out = bond_price(model->model, t, T, std::span<const double>(x, model->model.factors()));
    });
}

void bh_model_free(bh_model* model) { delete model; }

bh_status bh_contract_new(bh_style style, int payer, double notional, double strike, double start,
                          double end, int frequency, bh_contract** out) {
    return guard([&] {
        require(out, "out");
        if (style != BH_EUROPEAN && style != BH_BERMUDAN) throw std::invalid_argument("unknown exercise style");
        if (frequency <= 0) throw std::invalid_argument("frequency must be positive");
        *out = new bh_contract{make_swaption(style == BH_EUROPEAN ? ExerciseStyle::European : ExerciseStyle::Bermudan,
                                             payer != 0, notional, strike, start, end, frequency)};
    });
}

bh_status bh_contract_set_strike(bh_contract* contract, double strike) {
    return guard([&] {
        require(contract, "contract");
        BermudanSpec s = contract->spec;
        s.strike = strike;
        validate(s);
        contract->spec = s;
    });
}

double bh_contract_strike(const bh_contract* contract) { return contract ? contract->spec.strike : 0.0; }

double bh_contract_notional(const bh_contract* contract) { return contract ? contract->spec.notional : 0.0; }

size_t bh_contract_exercise_count(const bh_contract* contract) {
    return contract ? contract->spec.exercise_count() : 0;
}

bh_status bh_contract_swap_rate(const bh_model* model, const bh_contract* contract, double* out) {
    return guard([&] {
        require(model, "model");
        require(contract, "contract");
        require(out, "out");
        *out = initial_swap_rate(model->model, contract->spec);
    });
}

void bh_contract_free(bh_contract* contract) { delete contract; }

void bh_train_config_default(bh_train_config* cfg) {
    if (!cfg) return;
    const TrainConfig t;
    cfg->n_paths = t.n_paths;
    cfg->q = t.q;
    cfg->design = from_design(t.design);
    cfg->n_inputs = t.n_inputs;
    cfg->dt = t.dt;
    cfg->measure = t.measure == Measure::RiskNeutral ? BH_MEASURE_RISK_NEUTRAL : BH_MEASURE_FORWARD;
    cfg->domain_scale = t.domain_scale;
    cfg->wide_fraction = t.wide_fraction;
    cfg->epochs = t.optimizer.epochs;
    cfg->batch = t.optimizer.batch;
    cfg->learning_rate = t.optimizer.learning_rate;
    cfg->final_learning_rate = t.optimizer.final_learning_rate;
    cfg->tolerance = t.optimizer.tolerance;
    cfg->patience = t.optimizer.patience;
    cfg->shuffle = t.optimizer.shuffle ? 1 : 0;
    cfg->refit_output = t.optimizer.refit_output ? 1 : 0;
}

bh_status bh_hedge_fit(const bh_model* model, const bh_contract* contract, const bh_train_config* cfg,
                       uint64_t seed, bh_hedge** out) {
    return guard([&] {
        require(model, "model");
        require(contract, "contract");
        require(cfg, "cfg");
        require(out, "out");
        auto* h = new bh_hedge{model->model, {}};
        try {
            h->set = fit_hedge(h->model, contract->spec, to_config(*cfg), seed);
            attach_model(h->set, h->model);
        } catch (...) {
            delete h;
            throw;
        }
        *out = h;
    });
}

bh_status bh_hedge_load(const bh_model* model, const char* path, bh_hedge** out) {
    return guard([&] {
        require(model, "model");
        require(path, "path");
        require(out, "out");
        std::ifstream in(path);
        if (!in) throw IoError(std::string("cannot open ") + path);
        auto* h = new bh_hedge{model->model, {}};
        try {
            h->set = read_hedge_set(in, h->model);
        } catch (...) {
            delete h;
            throw;
        }
        *out = h;
    });
}

bh_status bh_hedge_save(const bh_hedge* hedge, const char* path) {
    return guard([&] {
        require(hedge, "hedge");
        auto out = open_out(path);
        write_hedge_set(out, hedge->set);
        finish(out, path);
    });
}

double bh_hedge_direct(const bh_hedge* hedge) { return hedge ? hedge->set.direct_estimate : 0.0; }

size_t bh_hedge_dates(const bh_hedge* hedge) { return hedge ? hedge->set.dates() : 0; }

bh_status bh_hedge_diagnostics(const bh_hedge* hedge, size_t m, bh_date_diagnostics* out) {
    return guard([&] {
        require(hedge, "hedge");
        require(out, "out");
        if (m >= hedge->set.diagnostics.size()) throw std::domain_error("date index out of range");
        const auto& d = hedge->set.diagnostics[m];
        *out = {d.index, d.date, d.mse, d.mae, d.discounted_mae, d.epochs};
    });
}

bh_status bh_hedge_margins(const bh_hedge* hedge, bh_margins* out) {
    return guard([&] {
        require(hedge, "hedge");
        require(out, "out");
        const ErrorMargins e = error_margins(hedge->set);
        *out = {e.epsilon, e.direct, e.lower, e.upper};
    });
}

bh_status bh_hedge_value(const bh_hedge* hedge, size_t m, double t, const double* x, double* out) {
    return guard([&] {
        require(hedge, "hedge");
        require(x, "x");
        require(out, "out");
        if (m >= hedge->set.dates()) throw std::domain_error("date index out of range");
        *out = portfolio_value(hedge->model, t, std::span<const double>(x, hedge->model.factors()),
                               hedge->set.networks[m], hedge->set.inputs[m]);
    });
}

bh_status bh_hedge_write_diagnostics_csv(const bh_hedge* hedge, const char* path) {
    return guard([&] {
        require(hedge, "hedge");
        auto out = open_out(path);
        write_diagnostics_csv(out, hedge->set);
        finish(out, path);
    });
}

bh_status bh_hedge_write_portfolio_csv(const bh_hedge* hedge, const char* path) {
    return guard([&] {
        require(hedge, "hedge");
        auto out = open_out(path);
        for (std::size_t m = 0; m < hedge->set.dates(); ++m)
            write_portfolio_csv(out, m, hedge->set.spec.dates[m],
                                portfolio_nodes(hedge->model, hedge->set.networks[m], hedge->set.inputs[m]),
                                m == 0);
        finish(out, path);
    });
}

void bh_hedge_free(bh_hedge* hedge) { delete hedge; }

void bh_bound_options_default(bh_bound_options* opts) {
    if (!opts) return;
    const BoundOptions b;
    *opts = {b.n_paths, b.n_runs, b.seed,
             b.measure == Measure::RiskNeutral ? BH_MEASURE_RISK_NEUTRAL : BH_MEASURE_FORWARD, b.dt};
}

bh_status bh_bounds_estimate(const bh_hedge* hedge, const bh_bound_options* opts, bh_bounds** out) {
    return guard([&] {
        require(hedge, "hedge");
        require(opts, "opts");
        require(out, "out");
        BoundOptions b;
        b.n_paths = opts->n_paths;
        b.n_runs = opts->n_runs;
        b.seed = opts->seed;
        b.measure = to_measure(opts->measure);
        b.dt = opts->dt;
        *out = new bh_bounds{estimate_bounds(hedge->set, hedge->model, b)};
    });
}

void bh_bounds_summary(const bh_bounds* bounds, bh_bound_summary* out) {
    if (!bounds || !out) return;
    const auto& r = bounds->report;
    *out = {r.lower.value, r.lower.se, r.upper.value, r.upper.se, r.n_runs, r.n_paths};
}

bh_status bh_bounds_run(const bh_bounds* bounds, size_t run, bh_bound_run* out) {
    return guard([&] {
        require(bounds, "bounds");
        require(out, "out");
        if (run >= bounds->report.runs.size()) throw std::domain_error("run index out of range");
        const auto& r = bounds->report.runs[run];
        *out = {r.lower.value, r.lower.se, r.upper.value, r.upper.se, r.exercise_rate};
    });
}

bh_status bh_bounds_increment(const bh_bounds* bounds, size_t run, size_t m, double* mean, double* se) {
    return guard([&] {
        require(bounds, "bounds");
        require(mean, "mean");
        require(se, "se");
        if (run >= bounds->report.runs.size()) throw std::domain_error("run index out of range");
        const auto& inc = bounds->report.runs[run].increments;
        if (m >= inc.size()) throw std::domain_error("date index out of range");
        *mean = inc[m].value;
        *se = inc[m].se;
    });
}

void bh_bounds_free(bh_bounds* bounds) { delete bounds; }

bh_status bh_jamshidian(const bh_model* model, const bh_contract* contract, double* out) {
    return guard([&] {
        require(model, "model");
        require(contract, "contract");
        require(out, "out");
        *out = jamshidian_price(model->model, contract->spec);
    });
}

bh_status bh_mc_european(const bh_model* model, const bh_contract* contract, size_t n_paths, uint64_t seed,
                         double* price, double* se) {
    return guard([&] {
        require(model, "model");
        require(contract, "contract");
        require(price, "price");
        const Estimate e = mc_european_price(model->model, contract->spec, n_paths, seed);
        *price = e.value;
        if (se) *se = e.se;
    });
}

bh_status bh_hw_delta(const bh_model* model, const bh_contract* contract, double t, double x, double* out) {
    return guard([&] {
        require(model, "model");
        require(contract, "contract");
        require(out, "out");
        *out = hw_swaption_delta(model->model, contract->spec, t, x);
    });
}

void bh_lsm_options_default(bh_lsm_options* opts) {
    if (!opts) return;
    const LsmOptions l;
    *opts = {l.n_paths, l.n_runs, l.seed, l.dt, l.out_of_sample ? 1 : 0};
}

bh_status bh_lsm_price(const bh_model* model, const bh_contract* contract, const bh_lsm_options* opts,
                       bh_lsm_result* out) {
    return guard([&] {
        require(model, "model");
        require(contract, "contract");
        require(opts, "opts");
        require(out, "out");
        LsmOptions l;
        l.n_paths = opts->n_paths;
        l.n_runs = opts->n_runs;
        l.seed = opts->seed;
        l.dt = opts->dt;
        l.out_of_sample = opts->out_of_sample != 0;
        const LsmResult r = lsm_price(model->model, contract->spec, l);
        *out = {r.price.value, r.price.se, r.ci_low, r.ci_high, r.runs.size(), r.warnings.size()};
    });
}

bh_status bh_hedge_error_static(const bh_hedge* hedge, size_t n_paths, uint64_t seed, bh_hedge_report** out) {
    return guard([&] {
        require(hedge, "hedge");
        require(out, "out");
        *out = new bh_hedge_report{static_hedge_error(hedge->set, hedge->model, n_paths, seed)};
    });
}

bh_status bh_hedge_error_dynamic(const bh_model* model, const bh_contract* contract, size_t rebalances,
                                 size_t n_paths, uint64_t seed, bh_hedge_report** out) {
    return guard([&] {
        require(model, "model");
        require(contract, "contract");
        require(out, "out");
        *out = new bh_hedge_report{dynamic_hedge_error(model->model, contract->spec, rebalances, n_paths, seed)};
    });
}

bh_status bh_hedge_error_semistatic(const bh_hedge* hedge, size_t n_paths, uint64_t seed, int discounted,
                                    bh_hedge_report** out) {
    return guard([&] {
        require(hedge, "hedge");
        require(out, "out");
        *out = new bh_hedge_report{
            semistatic_bermudan_hedge_error(hedge->set, hedge->model, n_paths, seed, discounted != 0)};
    });
}

void bh_report_summary(const bh_hedge_report* report, bh_hedge_summary* out) {
    if (!report || !out) return;
    const auto& r = report->report;
    *out = {r.mean, r.sd, r.p95, r.p95_abs, r.n_paths, r.seed};
}

const char* bh_report_strategy(const bh_hedge_report* report) {
    return report ? report->report.strategy.c_str() : "";
}

const double* bh_report_errors(const bh_hedge_report* report, size_t* n) {
    if (!report) {
        if (n) *n = 0;
        return nullptr;
    }
    if (n) *n = report->report.errors.size();
    return report->report.errors.data();
}

bh_status bh_report_write_errors_csv(const bh_hedge_report* report, const char* path) {
    return guard([&] {
        require(report, "report");
        auto out = open_out(path);
        write_hedge_errors_csv(out, report->report);
        finish(out, path);
    });
}

void bh_report_free(bh_hedge_report* report) { delete report; }

}  // extern "C"
