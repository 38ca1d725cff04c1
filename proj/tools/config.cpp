#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

namespace cli {

namespace pt = boost::property_tree;

RunError::RunError(const std::string& module_, bh_status status_, const std::string& what)
    : std::runtime_error(what), module(module_), status(status_) {}

void check(bh_status status, const char* module) {
    if (status != BH_OK)
        throw RunError(module, status, std::string(bh_status_name(status)) + ": " + bh_last_error());
}

std::string format_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    boost::split(out, s, boost::is_any_of(", \t"), boost::token_compress_on);
    out.erase(std::remove(out.begin(), out.end(), std::string()), out.end());
    return out;
}

namespace {

const char* design_name(bh_design d) {
    switch (d) {
        case BH_DESIGN_ONE_FACTOR: return "one_factor";
        case BH_DESIGN_LOCALLY_CONNECTED: return "locally_connected";
        case BH_DESIGN_FULLY_CONNECTED_LOG: return "fully_connected_log";
    }
    return "one_factor";
}

const char* measure_name(bh_measure m) { return m == BH_MEASURE_RISK_NEUTRAL ? "risk_neutral" : "forward"; }

template <class T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        if constexpr (std::is_floating_point_v<T>)
            s += format_double(v[i]);
        else if constexpr (std::is_arithmetic_v<T>)
            s += std::to_string(v[i]);
        else
            s += v[i];
    }
    return s;
}

// Wraps the parsed tree with the line of every key so errors can point at the file.
class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path.string()) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path_ + ": cannot open config");
        std::stringstream text;
        text << in.rdbuf();
        try {
            pt::ini_parser::read_ini(text, tree_);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigError(path_ + ":" + std::to_string(e.line()) + ": " + e.message());
        }
        index_lines(text.str());
    }

    bool has(const std::string& sec, const std::string& key) const {
        return tree_.get_child_optional(pt::ptree::path_type(sec + "/" + key, '/')).has_value();
    }

    std::string raw(const std::string& sec, const std::string& key) {
        used_.insert(sec + "." + key);
        return boost::trim_copy(tree_.get<std::string>(pt::ptree::path_type(sec + "/" + key, '/')));
    }

    [[noreturn]] void fail(const std::string& sec, const std::string& key, const std::string& msg) const {
        auto it = lines_.find(sec + "." + key);
        const std::string where = it == lines_.end() ? path_ : path_ + ":" + std::to_string(it->second);
        throw ConfigError(where + ": [" + sec + "] " + key + ": " + msg);
    }

    double number(const std::string& sec, const std::string& key, const std::string& text) const {
        double v = 0.0;
        auto r = std::from_chars(text.data(), text.data() + text.size(), v);
        if (r.ec != std::errc() || r.ptr != text.data() + text.size() || !std::isfinite(v))
            fail(sec, key, "expected a number, got '" + text + "'");
        return v;
    }

    std::uint64_t count(const std::string& sec, const std::string& key, const std::string& text) const {
        std::uint64_t v = 0;
        auto r = std::from_chars(text.data(), text.data() + text.size(), v);
        if (r.ec != std::errc() || r.ptr != text.data() + text.size())
            fail(sec, key, "expected a non-negative integer, got '" + text + "'");
        return v;
    }

    template <class T>
    void get(const std::string& sec, const std::string& key, T& out) {
        if (!has(sec, key)) return;
        const std::string text = raw(sec, key);
        if constexpr (std::is_same_v<T, bool>) {
            const std::string t = boost::to_lower_copy(text);
            if (t == "true" || t == "1" || t == "yes") out = true;
            else if (t == "false" || t == "0" || t == "no") out = false;
            else fail(sec, key, "expected true or false, got '" + text + "'");
        } else if constexpr (std::is_same_v<T, int>) {
            out = static_cast<int>(count(sec, key, text));
        } else if constexpr (std::is_integral_v<T>) {
            out = static_cast<T>(count(sec, key, text));
        } else if constexpr (std::is_floating_point_v<T>) {
            out = number(sec, key, text);
        } else {
            out = text;
        }
    }

    void get_list(const std::string& sec, const std::string& key, std::vector<double>& out) {
        if (!has(sec, key)) return;
        out.clear();
        for (const auto& s : split_list(raw(sec, key))) out.push_back(number(sec, key, s));
    }

    void get_list(const std::string& sec, const std::string& key, std::vector<std::size_t>& out) {
        if (!has(sec, key)) return;
        out.clear();
        for (const auto& s : split_list(raw(sec, key))) {
            // a..b expands to powers of two between a and b
            const auto dots = s.find("..");
            if (dots == std::string::npos) {
                out.push_back(count(sec, key, s));
                continue;
            }
            const auto lo = count(sec, key, s.substr(0, dots));
            const auto hi = count(sec, key, s.substr(dots + 2));
            if (lo == 0 || hi < lo) fail(sec, key, "bad range '" + s + "'");
            for (auto q = lo; q <= hi; q *= 2) out.push_back(q);
        }
    }

    void get_list(const std::string& sec, const std::string& key, std::vector<std::string>& out) {
        if (!has(sec, key)) return;
        out = split_list(raw(sec, key));
    }

    // Keys nobody asked for are typos more often than not.
    void reject_unknown() const {
        for (const auto& [sec, child] : tree_) {
            if (sec == "run") continue;  // written by the runner into manifests
            if (child.empty() && !child.data().empty())
                throw ConfigError(path_ + ": key '" + sec + "' outside any section");
            for (const auto& [key, _] : child)
                if (!used_.count(sec + "." + key)) fail(sec, key, "unknown key");
        }
    }

private:
    void index_lines(const std::string& text) {
        std::istringstream in(text);
        std::string line, section;
        for (int n = 1; std::getline(in, line); ++n) {
            boost::trim(line);
            if (line.empty() || line[0] == ';' || line[0] == '#') continue;
            if (line.front() == '[' && line.back() == ']') {
                section = boost::trim_copy(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq != std::string::npos) lines_[section + "." + boost::trim_copy(line.substr(0, eq))] = n;
        }
    }

    std::string path_;
    pt::ptree tree_;
    std::map<std::string, int> lines_;
    std::set<std::string> used_;
};

bh_design parse_design(Reader& r, const std::string& text) {
    if (text == "one_factor") return BH_DESIGN_ONE_FACTOR;
    if (text == "locally_connected") return BH_DESIGN_LOCALLY_CONNECTED;
    if (text == "fully_connected_log") return BH_DESIGN_FULLY_CONNECTED_LOG;
    r.fail("training", "design", "expected one_factor, locally_connected or fully_connected_log");
}

bh_measure parse_measure(Reader& r, const std::string& sec, const std::string& text) {
    if (text == "forward") return BH_MEASURE_FORWARD;
    if (text == "risk_neutral") return BH_MEASURE_RISK_NEUTRAL;
    r.fail(sec, "measure", "expected forward or risk_neutral");
}

const std::set<std::string> known_experiments{"price", "bounds", "benchmark", "hedge", "sweep"};

}  // namespace

Config default_config() {
    Config c;
    bh_train_config_default(&c.training);
    bh_bound_options_default(&c.bounds);
    return c;
}

Config load_config(const std::filesystem::path& path) {
    Reader r(path);
    Config c = default_config();

    if (r.has("experiment", "name")) {
        r.get_list("experiment", "name", c.experiments);
        for (const auto& e : c.experiments)
            if (!known_experiments.count(e))
                r.fail("experiment", "name", "unknown experiment '" + e + "'");
    }
    r.get("experiment", "seed", c.seed);
    r.get("experiment", "hedge_file", c.hedge_file);

    auto& m = c.model;
    r.get("model", "d", m.d);
    if (m.d < 1 || m.d > 8) r.fail("model", "d", "factor count must be between 1 and 8");
    if (m.d == 2 && !r.has("model", "a")) {
        m.a = {0.07, 0.08};
        m.sigma = {0.015, 0.008};
        m.rho = {1.0, -0.6, -0.6, 1.0};
    }
    r.get_list("model", "a", m.a);
    r.get_list("model", "sigma", m.sigma);
    if (r.has("model", "rho")) {
        std::vector<double> rho;
        r.get_list("model", "rho", rho);
        if (m.d == 2 && rho.size() == 1) rho = {1.0, rho[0], rho[0], 1.0};
        m.rho = rho;
    } else if (m.rho.size() != m.d * m.d) {
        m.rho.assign(m.d * m.d, 0.0);
        for (std::size_t i = 0; i < m.d; ++i) m.rho[i * m.d + i] = 1.0;
    }
    r.get("model", "f0", m.f0);
    if (m.a.size() != m.d) r.fail("model", "a", "needs d values");
    if (m.sigma.size() != m.d) r.fail("model", "sigma", "needs d values");
    if (m.rho.size() != m.d * m.d) r.fail("model", "rho", "needs d*d values (or one value when d = 2)");

    auto& k = c.contract;
    if (r.has("contract", "type")) {
        const auto t = r.raw("contract", "type");
        if (t != "payer" && t != "receiver") r.fail("contract", "type", "expected payer or receiver");
        k.payer = t == "payer";
    }
    if (r.has("contract", "style")) {
        const auto s = r.raw("contract", "style");
        if (s != "bermudan" && s != "european") r.fail("contract", "style", "expected bermudan or european");
        k.bermudan = s == "bermudan";
    }
    r.get("contract", "start", k.start);
    r.get("contract", "end", k.end);
    r.get("contract", "frequency", k.frequency);
    r.get("contract", "notional", k.notional);
    r.get_list("contract", "moneyness", k.moneyness);
    r.get("contract", "strike", k.strike);
    if (k.moneyness.empty()) r.fail("contract", "moneyness", "needs at least one value");
    if (k.end <= k.start || k.start < 0.0) r.fail("contract", "end", "needs 0 <= start < end");

    auto& t = c.training;
    if (m.d > 1 && !r.has("training", "design")) t.design = BH_DESIGN_LOCALLY_CONNECTED;
    r.get("training", "paths", t.n_paths);
    r.get("training", "nodes", t.q);
    if (r.has("training", "design")) t.design = parse_design(r, r.raw("training", "design"));
    r.get("training", "inputs", t.n_inputs);
    r.get("training", "dt", t.dt);
    if (r.has("training", "measure")) t.measure = parse_measure(r, "training", r.raw("training", "measure"));
    r.get("training", "domain_scale", t.domain_scale);
    r.get("training", "wide_fraction", t.wide_fraction);
    r.get("training", "epochs", t.epochs);
    r.get("training", "batch", t.batch);
    r.get("training", "learning_rate", t.learning_rate);
    r.get("training", "final_learning_rate", t.final_learning_rate);
    r.get("training", "tolerance", t.tolerance);
    r.get("training", "patience", t.patience);
    bool shuffle = t.shuffle != 0, refit = t.refit_output != 0;
    r.get("training", "shuffle", shuffle);
    r.get("training", "refit_output", refit);
    t.shuffle = shuffle;
    t.refit_output = refit;

    auto& b = c.bounds;
    r.get("bounds", "paths", b.n_paths);
    r.get("bounds", "runs", b.n_runs);
    r.get("bounds", "seed", b.seed);
    r.get("bounds", "dt", b.dt);
    if (r.has("bounds", "measure")) b.measure = parse_measure(r, "bounds", r.raw("bounds", "measure"));

    auto& h = c.hedge;
    r.get("hedge", "paths", h.paths);
    r.get("hedge", "rebalances", h.rebalances);
    r.get_list("hedge", "strategies", h.strategies);
    for (const auto& s : h.strategies)
        if (s != "static" && s != "dynamic" && s != "semistatic")
            r.fail("hedge", "strategies", "unknown strategy '" + s + "'");
    r.get("hedge", "discounted", h.discounted);
    r.get("hedge", "dump_errors", h.dump_errors);
    r.get("hedge", "domain_scale", h.domain_scale);
    r.get("hedge", "wide_fraction", h.wide_fraction);

    r.get_list("sweep", "nodes", c.sweep.nodes);
    r.get("sweep", "bounds", c.sweep.bounds);
    if (c.sweep.nodes.empty()) r.fail("sweep", "nodes", "needs at least one node count");

    auto& bm = c.benchmark;
    r.get("benchmark", "lsm_paths", bm.lsm_paths);
    r.get("benchmark", "lsm_runs", bm.lsm_runs);
    r.get("benchmark", "lsm_seed", bm.lsm_seed);
    r.get("benchmark", "out_of_sample", bm.out_of_sample);
    r.get("benchmark", "mc_paths", bm.mc_paths);

    r.reject_unknown();
    return c;
}

pt::ptree to_tree(const Config& c) {
    pt::ptree t;
    auto put = [&](const std::string& sec, const std::string& key, const std::string& value) {
        t.put(pt::ptree::path_type(sec + "/" + key, '/'), value);
    };
    auto num = [](double v) { return format_double(v); };
    auto flag = [](bool v) { return std::string(v ? "true" : "false"); };

    put("experiment", "name", join(c.experiments));
    put("experiment", "seed", std::to_string(c.seed));
    if (!c.hedge_file.empty()) put("experiment", "hedge_file", c.hedge_file);

    put("model", "d", std::to_string(c.model.d));
    put("model", "a", join(c.model.a));
    put("model", "sigma", join(c.model.sigma));
    put("model", "rho", join(c.model.rho));
    put("model", "f0", num(c.model.f0));

    put("contract", "type", c.contract.payer ? "payer" : "receiver");
    put("contract", "style", c.contract.bermudan ? "bermudan" : "european");
    put("contract", "start", num(c.contract.start));
    put("contract", "end", num(c.contract.end));
    put("contract", "frequency", std::to_string(c.contract.frequency));
    put("contract", "notional", num(c.contract.notional));
    put("contract", "moneyness", join(c.contract.moneyness));
    put("contract", "strike", num(c.contract.strike));

    const auto& tr = c.training;
    put("training", "paths", std::to_string(tr.n_paths));
    put("training", "nodes", std::to_string(tr.q));
    put("training", "design", design_name(tr.design));
    put("training", "inputs", std::to_string(tr.n_inputs));
    put("training", "dt", num(tr.dt));
    put("training", "measure", measure_name(tr.measure));
    put("training", "domain_scale", num(tr.domain_scale));
    put("training", "wide_fraction", num(tr.wide_fraction));
    put("training", "epochs", std::to_string(tr.epochs));
    put("training", "batch", std::to_string(tr.batch));
    put("training", "learning_rate", num(tr.learning_rate));
    put("training", "final_learning_rate", num(tr.final_learning_rate));
    put("training", "tolerance", num(tr.tolerance));
    put("training", "patience", std::to_string(tr.patience));
    put("training", "shuffle", flag(tr.shuffle));
    put("training", "refit_output", flag(tr.refit_output));

    put("bounds", "paths", std::to_string(c.bounds.n_paths));
    put("bounds", "runs", std::to_string(c.bounds.n_runs));
    put("bounds", "seed", std::to_string(c.bounds.seed));
    put("bounds", "dt", num(c.bounds.dt));
    put("bounds", "measure", measure_name(c.bounds.measure));

    put("hedge", "paths", std::to_string(c.hedge.paths));
    put("hedge", "rebalances", std::to_string(c.hedge.rebalances));
    put("hedge", "strategies", join(c.hedge.strategies));
    put("hedge", "discounted", flag(c.hedge.discounted));
    put("hedge", "dump_errors", flag(c.hedge.dump_errors));
    put("hedge", "domain_scale", num(c.hedge.domain_scale));
    put("hedge", "wide_fraction", num(c.hedge.wide_fraction));

    put("sweep", "nodes", join(c.sweep.nodes));
    put("sweep", "bounds", flag(c.sweep.bounds));

    put("benchmark", "lsm_paths", std::to_string(c.benchmark.lsm_paths));
    put("benchmark", "lsm_runs", std::to_string(c.benchmark.lsm_runs));
    put("benchmark", "lsm_seed", std::to_string(c.benchmark.lsm_seed));
    put("benchmark", "out_of_sample", flag(c.benchmark.out_of_sample));
    put("benchmark", "mc_paths", std::to_string(c.benchmark.mc_paths));
    return t;
}

void write_ini(const std::filesystem::path& path, const pt::ptree& tree) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    pt::ini_parser::write_ini(out, tree);
}

}  // namespace cli
