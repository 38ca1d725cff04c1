#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include "experiments.hpp"

namespace cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw RunError("report", BH_ERR_IO, "cannot read " + path.string());
    Table t;
    std::string line;
    if (std::getline(in, line)) boost::split(t.header, line, boost::is_any_of(","));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        boost::split(cells, line, boost::is_any_of(","));
        if (cells.size() != t.header.size())
            throw RunError("report", BH_ERR_IO, path.string() + ": ragged row");
        t.rows.push_back(std::move(cells));
    }
    return t;
}

// Input file, output table, and the columns that identify a row.
struct Merge {
    const char* input;
    const char* output;
    std::vector<std::string> keys;
    std::vector<std::string> drop;
};

const std::vector<Merge> merges{
    {"results.csv", "table_bounds.csv", {"type", "style", "moneyness"}, {"strike"}},
    {"bounds_runs.csv", "table_bound_runs.csv", {"type", "style", "moneyness"}, {"run"}},
    {"diagnostics.csv", "table_mae.csv", {"moneyness", "nodes", "date_index"}, {"date"}},
    {"benchmark.csv", "table_benchmark.csv", {"type", "style", "moneyness"}, {"strike"}},
    {"hedge.csv", "table_hedge.csv", {"strategy", "moneyness"}, {"paths"}},
    {"sweep.csv", "table_sweep.csv", {"design", "moneyness", "nodes"}, {}},
    {"sweep_mae.csv", "table_sweep_mae.csv", {"moneyness", "nodes", "date_index"}, {"date"}},
};

bool is_number(const std::string& s, double& v) {
    if (s == "NA") {
        v = std::nan("");
        return true;
    }
    try {
        std::size_t used = 0;
        v = std::stod(s, &used);
        return used == s.size();
    } catch (...) {
        return false;
    }
}

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : "NA"; }

std::map<std::string, std::string> flatten(const pt::ptree& tree) {
    std::map<std::string, std::string> out;
    for (const auto& [sec, child] : tree)
        for (const auto& [key, value] : child) out[sec + "." + key] = value.data();
    return out;
}

// Seeds may differ between replicate runs; so may the experiment list.
bool compared(const std::string& key) {
    if (key.rfind("run.", 0) == 0) return false;
    if (key == "experiment.name" || key == "experiment.hedge_file") return false;
    return !boost::ends_with(key, "seed");
}

void check_same_config(const std::vector<fs::path>& runs) {
    std::map<std::string, std::string> first;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        pt::ptree tree;
        pt::ini_parser::read_ini((runs[i] / "manifest.ini").string(), tree);
        auto flat = flatten(tree);
        if (i == 0) {
            first = flat;
            continue;
        }
        std::set<std::string> keys;
        for (const auto& [k, _] : first) keys.insert(k);
        for (const auto& [k, _] : flat) keys.insert(k);
        std::ostringstream diff;
        for (const auto& k : keys) {
            if (!compared(k)) continue;
            const auto a = first.count(k) ? first[k] : "<unset>";
            const auto b = flat.count(k) ? flat[k] : "<unset>";
            if (a != b)
                diff << "\n  " << k << ": '" << a << "' in " << runs[0].string() << " vs '" << b << "' in "
                     << runs[i].string();
        }
        if (!diff.str().empty())
            throw RunError("report", BH_ERR_INVALID_ARGUMENT, "runs use different configurations:" + diff.str());
    }
}

// Mean and standard error over all rows sharing the key columns.
void merge(const Merge& m, const std::vector<fs::path>& runs, const fs::path& dir, std::vector<std::string>& written) {
    std::vector<Table> tables;
    for (const auto& r : runs)
        if (fs::exists(r / m.input)) tables.push_back(read_csv(r / m.input));
    if (tables.empty()) return;
    const auto& header = tables.front().header;
    for (const auto& t : tables)
        if (t.header != header) throw RunError("report", BH_ERR_INVALID_ARGUMENT, std::string(m.input) + ": headers differ");

    std::vector<std::size_t> key_idx, value_idx;
    std::vector<std::string> value_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto& name = header[c];
        if (std::find(m.keys.begin(), m.keys.end(), name) != m.keys.end()) key_idx.push_back(c);
        else if (std::find(m.drop.begin(), m.drop.end(), name) != m.drop.end() || boost::ends_with(name, "_se")) continue;
        else {
            value_idx.push_back(c);
            value_names.push_back(name);
        }
    }

    std::vector<std::vector<std::string>> order;
    std::map<std::vector<std::string>, std::vector<std::vector<double>>> groups;
    for (const auto& t : tables)
        for (const auto& row : t.rows) {
            std::vector<std::string> key;
            for (auto c : key_idx) key.push_back(row[c]);
            std::vector<double> values;
            for (auto c : value_idx) {
                double v = 0;
                if (!is_number(row[c], v)) v = std::nan("");
                values.push_back(v);
            }
            if (!groups.count(key)) order.push_back(key);
            groups[key].push_back(std::move(values));
        }

    std::ofstream out(dir / m.output);
    if (!out) throw RunError("report", BH_ERR_IO, "cannot write " + (dir / m.output).string());
    for (auto c : key_idx) out << header[c] << ',';
    out << 'n';
    for (const auto& v : value_names) out << ',' << v << ',' << v << "_se";
    out << '\n';
    for (const auto& key : order) {
        const auto& rows = groups[key];
        for (const auto& k : key) out << k << ',';
        out << rows.size();
        for (std::size_t j = 0; j < value_names.size(); ++j) {
            double sum = 0;
            std::size_t n = 0;
            for (const auto& r : rows)
                if (std::isfinite(r[j])) {
                    sum += r[j];
                    ++n;
                }
            const double mean = n ? sum / n : std::nan("");
            double se = std::nan("");
            if (n > 1) {
                double ss = 0;
                for (const auto& r : rows)
                    if (std::isfinite(r[j])) ss += (r[j] - mean) * (r[j] - mean);
                se = std::sqrt(ss / (n - 1) / n);
            }
            out << ',' << cell(mean) << ',' << cell(se);
        }
        out << '\n';
    }
    written.push_back(m.output);
}

}  // namespace

std::vector<std::string> report(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw RunError("report", BH_ERR_IO, dir.string() + " is not a directory");
    std::vector<fs::path> runs;
    if (fs::exists(dir / "manifest.ini")) runs.push_back(dir);
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && fs::exists(e.path() / "manifest.ini")) subdirs.push_back(e.path());
    std::sort(subdirs.begin(), subdirs.end());
    runs.insert(runs.end(), subdirs.begin(), subdirs.end());
    if (runs.empty()) throw RunError("report", BH_ERR_IO, dir.string() + " holds no run manifests");

    check_same_config(runs);
    std::vector<std::string> written;
    for (const auto& m : merges) merge(m, runs, dir, written);
    return written;
}

}  // namespace cli
