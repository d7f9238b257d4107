#include "deconv/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace deconv {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

ConfigMap ConfigMap::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_string(buf.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

ConfigMap ConfigMap::from_string(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        ": expected key = value, got '" + line + "'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": empty key");
        }
        cfg.map_[key] = value;
    }
    return cfg;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
    if (trim(key).empty()) throw std::invalid_argument("empty config key");
    map_[trim(key)] = trim(value);
}

void ConfigMap::apply_override(const std::string& spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos || trim(spec.substr(0, eq)).empty()) {
        throw std::invalid_argument("override must look like key=value, got '" + spec + "'");
    }
    set(spec.substr(0, eq), spec.substr(eq + 1));
}

bool ConfigMap::has(const std::string& key) const { return map_.count(key) != 0; }

std::string ConfigMap::get_string(const std::string& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) throw std::invalid_argument("missing config key: " + key);
    return it->second;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    auto it = map_.find(key);
    return it == map_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key) const {
    std::string v = get_string(key);
    size_t pos = 0;
    double d;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key " + key + ": not a number: '" + v + "'");
    }
    if (pos != v.size()) {
        throw std::invalid_argument("config key " + key + ": trailing junk in '" + v + "'");
    }
    return d;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t ConfigMap::get_int(const std::string& key) const {
    std::string v = get_string(key);
    size_t pos = 0;
    long long i;
    try {
        i = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key " + key + ": not an integer: '" + v + "'");
    }
    if (pos != v.size()) {
        // tolerate scientific notation for large counts, e.g. n = 1e6
        double d = get_double(key);
        i = static_cast<long long>(d);
        if (static_cast<double>(i) != d) {
            throw std::invalid_argument("config key " + key + ": not an integer: '" + v + "'");
        }
    }
    return i;
}

std::int64_t ConfigMap::get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t ConfigMap::get_uint64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    std::string v = get_string(key);
    size_t pos = 0;
    unsigned long long u;
    try {
        u = std::stoull(v, &pos, 0);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key " + key + ": not an unsigned integer: '" + v + "'");
    }
    if (pos != v.size()) {
        throw std::invalid_argument("config key " + key + ": trailing junk in '" + v + "'");
    }
    return u;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string v = get_string(key);
    for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config key " + key + ": not a boolean: '" + v + "'");
}

std::optional<double> ConfigMap::maybe_double(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get_double(key);
}

std::string ConfigMap::canonical_text() const {
    std::ostringstream os;
    for (const auto& [k, v] : map_) os << k << " = " << v << "\n";
    return os.str();
}

std::uint64_t ConfigMap::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical_text()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace deconv
