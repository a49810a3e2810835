#include "cocyclelab/errors.hpp"
#include "cocyclelab/harness.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cocy::harness {

namespace {

const std::set<std::string> kSections{"base", "cocycle", "operation", "output"};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string field(const std::string& section, const std::string& key) { return section + "." + key; }

double parse_decimal(const std::string& text, const std::string& where) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size() || !std::isfinite(v))
        throw ConfigError(where + ": expected a decimal number, got '" + text + "'");
    return v;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!kSections.count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
            cfg.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        if (section.empty()) throw ConfigError(where + ": key outside of a section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (cfg.sections_[section].count(key)) throw ConfigError(where + ": duplicate key " + field(section, key));
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open config");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
}

const std::string* ExperimentConfig::find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    used_.insert(field(section, key));
    return &k->second;
}

bool ExperimentConfig::has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key);
}

std::string ExperimentConfig::str(const std::string& section, const std::string& key) const {
    const std::string* v = find(section, key);
    if (!v) throw ConfigError(field(section, key) + ": missing");
    return *v;
}

std::string ExperimentConfig::str(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
    const std::string* v = find(section, key);
    return v ? *v : fallback;
}

double ExperimentConfig::num(const std::string& section, const std::string& key) const {
    return parse_decimal(str(section, key), field(section, key));
}

double ExperimentConfig::num(const std::string& section, const std::string& key, double fallback) const {
    const std::string* v = find(section, key);
    return v ? parse_decimal(*v, field(section, key)) : fallback;
}

double ExperimentConfig::num_in(const std::string& section, const std::string& key, double fallback, double lo,
                                double hi) const {
    const double v = num(section, key, fallback);
    if (v < lo || v > hi) {
        std::ostringstream os;
        os << field(section, key) << ": " << v << " outside [" << lo << ", " << hi << "]";
        throw ConfigError(os.str());
    }
    return v;
}

long ExperimentConfig::integer(const std::string& section, const std::string& key, long fallback, long lo,
                               long hi) const {
    const std::string* v = find(section, key);
    long out = fallback;
    if (v) {
        const double d = parse_decimal(*v, field(section, key));
        if (d != std::floor(d) || std::abs(d) > 9e15) throw ConfigError(field(section, key) + ": expected an integer, got '" + *v + "'");
        out = static_cast<long>(d);
    }
    if (out < lo || out > hi)
        throw ConfigError(field(section, key) + ": " + std::to_string(out) + " outside [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    return out;
}

std::uint64_t ExperimentConfig::seed() const {
    const std::string* v = find("operation", "seed");
    if (!v) throw ConfigError("operation.seed: missing (seeds are mandatory)");
    std::uint64_t s = 0;
    const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), s);
    if (ec != std::errc() || p != v->data() + v->size())
        throw ConfigError("operation.seed: expected an unsigned 64-bit integer, got '" + *v + "'");
    return s;
}

std::vector<double> ExperimentConfig::numbers(const std::string& section, const std::string& key,
                                              const std::vector<double>& fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    std::vector<double> out;
    std::string tok;
    std::istringstream in(*v);
    while (in >> tok) {
        if (tok.back() == ',') tok.pop_back();
        if (!tok.empty()) out.push_back(parse_decimal(tok, field(section, key)));
    }
    if (out.empty()) throw ConfigError(field(section, key) + ": expected a list of numbers");
    return out;
}

void ExperimentConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    if (!kSections.count(section)) throw ConfigError("unknown section [" + section + "]");
    sections_[section][key] = value;
}

void ExperimentConfig::check_consumed() const {
    std::string unknown;
    for (const auto& [s, kv] : sections_)
        for (const auto& [k, v] : kv)
            if (!used_.count(field(s, k))) unknown += (unknown.empty() ? "" : ", ") + field(s, k);
    if (!unknown.empty()) throw ConfigError("unknown keys: " + unknown);
}

Json ExperimentConfig::echo() const {
    Json j = Json::object();
    for (const auto& [s, kv] : sections_) {
        Json sec = Json::object();
        for (const auto& [k, v] : kv) sec[k] = v;
        j[s] = sec;
    }
    return j;
}

// ---------------------------------------------------------------- builders

namespace {

DiscreteBase make_map(const ExperimentConfig& cfg, const std::string& key, const std::string& alpha_key) {
    const std::string kind = cfg.str("base", key);
    if (kind == "doubling") return DiscreteBase::doubling();
    if (kind == "golden") return DiscreteBase::golden_rotation();
    if (kind == "cat") return DiscreteBase::cat();
    if (kind == "rotation") {
        const double a = cfg.num("base", alpha_key);
        if (a <= 0.0 || a >= 1.0) throw ConfigError("base." + alpha_key + ": rotation number must lie in (0, 1)");
        return DiscreteBase::rotation(a);
    }
    throw ConfigError("base." + key + ": unknown base '" + kind + "' (doubling, golden, rotation, cat)");
}

}  // namespace

BaseSpec make_base(const ExperimentConfig& cfg) {
    BaseSpec b;
    const std::string kind = cfg.str("base", "kind");
    if (kind == "suspension") {
        b.flow = FlowBase::suspension(make_map(cfg, "section", "alpha"));
    } else if (kind == "torus") {
        b.flow = FlowBase::linear_torus(cfg.num("base", "gamma"));
    } else {
        b.map = make_map(cfg, "kind", "alpha");
    }
    return b;
}

MatrixCocycle make_cocycle(const ExperimentConfig& cfg, const std::string& rule_key) {
    const long d = cfg.integer("cocycle", "dim", 2, 1, 6);
    const std::string fam = cfg.str("cocycle", "family", "sl");
    const auto family = parse_family(fam, static_cast<int>(d));
    if (!family) throw ConfigError("cocycle.family: '" + fam + "' is not a family in dimension " + std::to_string(d));
    RulePtr rule;
    try {
        rule = parse_rule(cfg.str("cocycle", rule_key), static_cast<int>(d));
    } catch (const ConfigError& e) {
        throw ConfigError("cocycle." + rule_key + ": " + e.what());
    }
    return MatrixCocycle(*family, rule);
}

Generator make_generator(const ExperimentConfig& cfg) {
    const long d = cfg.integer("cocycle", "dim", 2, 1, 6);
    const std::string name = cfg.str("cocycle", "family", "sl");
    const auto alg = parse_algebra(name, static_cast<int>(d));
    if (!alg) throw ConfigError("cocycle.family: '" + name + "' is not an algebra in dimension " + std::to_string(d));
    RulePtr rule;
    try {
        rule = parse_rule(cfg.str("cocycle", "generator"), static_cast<int>(d));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("cocycle.generator: ") + e.what());
    }
    try {
        return Generator(*alg, rule);
    } catch (const FamilyViolation& e) {
        throw ConfigError(std::string("cocycle.generator: ") + e.what());
    }
}

}  // namespace cocy::harness
