#include "bermudan/simulation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "bermudan/errors.hpp"
#include "bermudan/parallel.hpp"

namespace bermudan {

static_assert(std::endian::native == std::endian::little, "binary dumps assume little-endian");

const char* to_string(Measure m) {
    return m == Measure::RiskNeutral ? "risk_neutral" : "forward";
}

Measure measure_from_string(const std::string& s) {
    if (s == "risk_neutral" || s == "rn" || s == "Q") return Measure::RiskNeutral;
    if (s == "forward" || s == "forward_tm" || s == "TM") return Measure::ForwardTM;
    throw std::invalid_argument("unknown measure '" + s + "'");
}

std::vector<double> build_time_grid(std::span<const double> key_times, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::domain_error("time step must be positive");
    std::vector<double> keys(key_times.begin(), key_times.end());
    for (double t : keys)
        if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("grid times must be >= 0");
    keys.push_back(0.0);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    std::vector<double> grid{0.0};
    for (std::size_t k = 1; k < keys.size(); ++k) {
        const double span = keys[k] - keys[k - 1];
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
        for (std::size_t j = 1; j < n; ++j)
            grid.push_back(keys[k - 1] + span * static_cast<double>(j) / static_cast<double>(n));
        grid.push_back(keys[k]);
    }
    return grid;
}

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.empty() || grid[0] != 0.0) throw std::domain_error("grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::domain_error("grid must be strictly increasing");
}

// Lower Cholesky factor of a small symmetric PSD matrix; zero pivots give zero columns.
void cholesky(const std::vector<double>& a, std::size_t d, double* L) {
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i * d + k] * L[j * d + k];
            if (i == j) {
                L[i * d + i] = s > 0.0 ? std::sqrt(s) : 0.0;
            } else {
                L[i * d + j] = L[j * d + j] > 0.0 ? s / L[j * d + j] : 0.0;
            }
        }
    }
}

// 10-point Gauss-Legendre; integrands here are smooth over a single step.
template <class F>
double integrate(double lo, double hi, F&& f) {
    static constexpr double node[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                       0.8650633666889845, 0.9739065285171717};
    static constexpr double weight[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                         0.1494513491505806, 0.0666713443086881};
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += weight[k] * (f(mid - half * node[k]) + f(mid + half * node[k]));
    return s * half;
}

}  // namespace

PathGenerator::PathGenerator(const GaussianModel& model, std::vector<double> grid, Measure measure,
                             std::uint64_t seed, double forward_maturity)
    : model_(&model),
      grid_(std::move(grid)),
      measure_(measure),
      seed_(seed),
      forward_maturity_(forward_maturity),
      d_(model.factors()) {
    check_grid(grid_);
    if (d_ > 8) throw std::invalid_argument("at most 8 factors supported");
    if (measure_ == Measure::ForwardTM && grid_.back() > forward_maturity_ + 1e-12)
        throw std::domain_error("forward-measure grid extends past the numeraire maturity");

    const std::size_t steps = grid_.size() - 1;
    dt_.resize(steps);
    decay_.resize(steps * d_);
    mean_shift_.assign(steps * d_, 0.0);
    chol_.assign(steps * d_ * d_, 0.0);
    shift_.resize(grid_.size());
    for (std::size_t n = 0; n < grid_.size(); ++n) shift_[n] = short_rate_shift(model, grid_[n]);
    std::vector<double> cov(d_ * d_);
    for (std::size_t n = 0; n < steps; ++n) {
        const double h = grid_[n + 1] - grid_[n];
        dt_[n] = h;
        for (std::size_t i = 0; i < d_; ++i) {
            const double ai = model.mean_reversion(i);
            decay_[n * d_ + i] = std::exp(-ai * h);
            for (std::size_t j = 0; j < d_; ++j)
                cov[i * d_ + j] = model.covariation(i, j) * decay_integral(ai + model.mean_reversion(j), h);
        }
        cholesky(cov, d_, chol_.data() + n * d_ * d_);
        if (measure_ == Measure::ForwardTM) {
            // -int_t^{t+h} exp(-a_i (t+h-u)) sum_j rho_ij s_i s_j B_j(u, T) du
            for (std::size_t i = 0; i < d_; ++i) {
                const double ai = model.mean_reversion(i);
                mean_shift_[n * d_ + i] = -integrate(grid_[n], grid_[n + 1], [&](double u) {
                    double v = 0.0;
                    for (std::size_t j = 0; j < d_; ++j)
                        v += model.covariation(i, j) *
                             decay_integral(model.mean_reversion(j), forward_maturity_ - u);
                    return std::exp(-ai * (grid_[n + 1] - u)) * v;
                });
            }
        }
    }
    if (measure_ == Measure::ForwardTM) {
        forward_bond_.reserve(grid_.size());
        for (double t : grid_)
            forward_bond_.push_back(bond_coeffs(model, std::min(t, forward_maturity_), forward_maturity_));
    }
}

std::size_t PathSet::time_index(double t) const {
    auto it = std::lower_bound(grid.begin(), grid.end(), t - 1e-10);
    if (it == grid.end() || std::abs(*it - t) > 1e-10)
        throw std::out_of_range("time " + std::to_string(t) + " is not on the path grid");
    return static_cast<std::size_t>(it - grid.begin());
}

namespace {

PathSet run(const GaussianModel& model, std::vector<double> grid, std::vector<char> keep,
            std::size_t n_paths, Measure measure, std::uint64_t seed, double forward_maturity) {
    if (n_paths == 0) throw std::invalid_argument("n_paths must be >= 1");
    PathGenerator gen(model, grid, measure, seed, forward_maturity);

    std::vector<std::size_t> slot(grid.size(), SIZE_MAX);
    PathSet ps;
    ps.measure = measure;
    ps.n_paths = n_paths;
    ps.factors = model.factors();
    ps.seed = seed;
    ps.forward_maturity = measure == Measure::ForwardTM ? forward_maturity : 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) {
        if (!keep[n]) continue;
        slot[n] = ps.grid.size();
        ps.grid.push_back(grid[n]);
    }
    const std::size_t nt = ps.grid.size();
    const std::size_t d = ps.factors;
    ps.paths.assign(n_paths * nt * d, 0.0);
    ps.numeraire.assign(n_paths * nt, 0.0);

    parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            gen.generate(p, [&](std::size_t step, std::span<const double> x, double num) {
                const std::size_t s = slot[step];
                if (s == SIZE_MAX) return;
                std::copy(x.begin(), x.end(), ps.paths.begin() + static_cast<std::ptrdiff_t>((p * nt + s) * d));
                ps.numeraire[p * nt + s] = num;
            });
        }
    });
    return ps;
}

}  // namespace

PathSet simulate(const GaussianModel& model, std::span<const double> grid, std::size_t n_paths,
                 Measure measure, std::uint64_t seed, double forward_maturity) {
    check_grid(grid);
    std::vector<double> g(grid.begin(), grid.end());
    return run(model, g, std::vector<char>(g.size(), 1), n_paths, measure, seed, forward_maturity);
}

PathSet simulate_observed(const GaussianModel& model, std::span<const double> observe, double dt,
                          std::size_t n_paths, Measure measure, std::uint64_t seed,
                          double forward_maturity) {
    std::vector<double> grid = build_time_grid(observe, dt);
    std::vector<char> keep(grid.size(), 0);
    keep[0] = 1;
    for (double t : observe) {
        auto it = std::lower_bound(grid.begin(), grid.end(), t);
        keep[static_cast<std::size_t>(it - grid.begin())] = 1;
    }
    return run(model, grid, keep, n_paths, measure, seed, forward_maturity);
}

PathSet accrue_numeraire(const GaussianModel& model, PathSet ps) {
    if (ps.measure != Measure::RiskNeutral)
        throw std::logic_error("accrue_numeraire requires a risk-neutral path set");
    const std::size_t nt = ps.n_times();
    std::vector<double> shift(nt);
    for (std::size_t n = 0; n < nt; ++n) shift[n] = short_rate_shift(model, ps.grid[n]);
    for (std::size_t p = 0; p < ps.n_paths; ++p) {
        double log_bank = 0.0;
        double prev = 0.0;
        for (std::size_t n = 0; n < nt; ++n) {
            double r = shift[n];
            for (double xi : ps.state(p, n)) r += xi;
            if (n > 0) log_bank += 0.5 * (prev + r) * (ps.grid[n] - ps.grid[n - 1]);
            prev = r;
            ps.numeraire[p * nt + n] = std::exp(log_bank);
        }
    }
    return ps;
}

namespace {

constexpr char kMagic[4] = {'B', 'H', 'P', 'S'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("truncated path set file");
    return v;
}

void get_doubles(std::ifstream& in, std::vector<double>& v, std::size_t n) {
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw IoError("truncated path set file");
}

}  // namespace

void write_pathset(const std::filesystem::path& file, const PathSet& ps) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open " + file.string());
    out.write(kMagic, 4);
    put(out, kVersion);
    put(out, static_cast<std::uint32_t>(ps.factors));
    put(out, static_cast<std::uint64_t>(ps.n_paths));
    put(out, static_cast<std::uint64_t>(ps.n_times()));
    put(out, static_cast<std::uint32_t>(ps.measure));
    put(out, ps.seed);
    put(out, ps.forward_maturity);
    auto doubles = [&](const std::vector<double>& v) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    doubles(ps.grid);
    doubles(ps.paths);
    doubles(ps.numeraire);
    if (!out) throw IoError("write failed: " + file.string());
}

PathSet read_pathset(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw IoError("not a path set file");
    if (get<std::uint32_t>(in) != kVersion) throw IoError("unsupported path set version");
    PathSet ps;
    ps.factors = get<std::uint32_t>(in);
    ps.n_paths = get<std::uint64_t>(in);
    const auto nt = get<std::uint64_t>(in);
    const auto m = get<std::uint32_t>(in);
    if (m > 1) throw IoError("bad measure tag");
    ps.measure = static_cast<Measure>(m);
    ps.seed = get<std::uint64_t>(in);
    ps.forward_maturity = get<double>(in);
    get_doubles(in, ps.grid, nt);
    get_doubles(in, ps.paths, ps.n_paths * nt * ps.factors);
    get_doubles(in, ps.numeraire, ps.n_paths * nt);
    return ps;
}

}  // namespace bermudan
