#include "deconv/report_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace deconv {

namespace {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << "0x" << std::hex << v;
    return os.str();
}

std::uint64_t parse_hex64(const std::string& s) {
    size_t pos = 0;
    std::uint64_t v = std::stoull(s, &pos, 0);
    if (pos != s.size()) throw std::invalid_argument("bad seed string: " + s);
    return v;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("short write to " + path);
}

}  // namespace

std::string report_to_json(const MonteCarloReport& rep) {
    json j;
    j["statistic"] = rep.statistic;
    j["config_hash"] = hex64(rep.config_hash);
    j["config"] = rep.config_entries;
    j["n"] = rep.n;
    j["replications"] = rep.replications;
    j["h"] = rep.h;
    j["seed"] = hex64(rep.seed);
    j["predicted_mean"] = rep.predicted_mean;
    j["predicted_variance"] = rep.predicted_variance;
    j["limit_mean"] = rep.limit_mean;
    j["limit_variance"] = rep.limit_variance;
    j["empirical_mean"] = rep.empirical_mean;
    j["empirical_variance"] = rep.empirical_variance;
    j["ks_statistic"] = rep.ks_statistic;
    j["ks_p_value"] = rep.ks_p_value;
    j["n_failed"] = rep.n_failed;
    j["profile_fallbacks"] = rep.profile_fallbacks;
    j["wall_seconds"] = rep.wall_seconds;
    if (rep.a_used) j["a_used"] = *rep.a_used;
    j["note"] = rep.note;
    json seeds = json::array();
    for (auto s : rep.rep_seeds) seeds.push_back(hex64(s));
    j["rep_seeds"] = std::move(seeds);
    j["standardized"] = rep.standardized;
    return j.dump(2);
}

MonteCarloReport report_from_json(const std::string& text) {
    json j = json::parse(text);
    MonteCarloReport rep;
    rep.statistic = j.at("statistic").get<std::string>();
    rep.config_hash = parse_hex64(j.at("config_hash").get<std::string>());
    rep.config_entries = j.at("config").get<std::map<std::string, std::string>>();
    rep.n = j.at("n").get<std::size_t>();
    rep.replications = j.at("replications").get<std::size_t>();
    rep.h = j.at("h").get<double>();
    rep.seed = parse_hex64(j.at("seed").get<std::string>());
    rep.predicted_mean = j.at("predicted_mean").get<double>();
    rep.predicted_variance = j.at("predicted_variance").get<double>();
    rep.limit_mean = j.at("limit_mean").get<double>();
    rep.limit_variance = j.at("limit_variance").get<double>();
    rep.empirical_mean = j.at("empirical_mean").get<double>();
    rep.empirical_variance = j.at("empirical_variance").get<double>();
    rep.ks_statistic = j.at("ks_statistic").get<double>();
    rep.ks_p_value = j.at("ks_p_value").get<double>();
    rep.n_failed = j.at("n_failed").get<std::size_t>();
    rep.profile_fallbacks = j.at("profile_fallbacks").get<std::size_t>();
    rep.wall_seconds = j.at("wall_seconds").get<double>();
    if (j.contains("a_used")) rep.a_used = j.at("a_used").get<double>();
    rep.note = j.at("note").get<std::string>();
    for (const auto& s : j.at("rep_seeds")) rep.rep_seeds.push_back(parse_hex64(s.get<std::string>()));
    rep.standardized = j.at("standardized").get<std::vector<double>>();
    return rep;
}

void write_report_json(const MonteCarloReport& rep, const std::string& path) {
    write_text(path, report_to_json(rep) + "\n");
}

MonteCarloReport read_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return report_from_json(buf.str());
}

void write_report_csv(const MonteCarloReport& rep, const std::string& path) {
    std::ostringstream os;
    os.precision(17);
    os << "# statistic = " << rep.statistic << "\n";
    os << "# config_hash = " << hex64(rep.config_hash) << "\n";
    for (const auto& [k, v] : rep.config_entries) os << "# " << k << " = " << v << "\n";
    os << "# predicted_variance = " << rep.predicted_variance << "\n";
    os << "# limit_variance = " << rep.limit_variance << "\n";
    os << "index,seed,standardized\n";
    bool aligned = rep.rep_seeds.size() == rep.standardized.size();
    for (std::size_t i = 0; i < rep.standardized.size(); ++i) {
        os << i << "," << (aligned ? hex64(rep.rep_seeds[i]) : std::string("0x0")) << ","
           << rep.standardized[i] << "\n";
    }
    write_text(path, os.str());
}

std::string sweep_to_json(const SweepTable& table) {
    json j;
    j["statistic"] = table.statistic;
    json rows = json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"h", r.h},
                        {"empirical_variance", r.empirical_variance},
                        {"predicted_variance", r.predicted_variance},
                        {"limit_variance", r.limit_variance},
                        {"ratio_to_limit", r.ratio_to_limit},
                        {"ks_p_value", r.ks_p_value}});
    }
    j["rows"] = std::move(rows);
    return j.dump(2);
}

void write_sweep_json(const SweepTable& table, const std::string& path) {
    write_text(path, sweep_to_json(table) + "\n");
}

}  // namespace deconv
