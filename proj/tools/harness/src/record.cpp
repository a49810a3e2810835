#include "cocyclelab/errors.hpp"
#include "cocyclelab/harness.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace cocy::harness {

namespace {

// JSON has no NaN or infinity; both become null
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string type_of(const Json& j) {
    if (j.is_null()) return "null";
    if (j.is_boolean()) return "boolean";
    if (j.is_number_integer() || j.is_number_unsigned()) return "integer";
    if (j.is_number()) return "number";
    if (j.is_string()) return "string";
    if (j.is_array()) return "array";
    return "object";
}

bool type_matches(const Json& inst, const std::string& want) {
    const std::string t = type_of(inst);
    return t == want || (want == "number" && t == "integer");
}

void validate_at(const Json& inst, const Json& schema, const std::string& path, std::vector<std::string>& out) {
    if (schema.contains("type")) {
        const Json& ty = schema["type"];
        bool ok = false;
        if (ty.is_string()) ok = type_matches(inst, ty.get<std::string>());
        else
            for (const auto& t : ty) ok = ok || type_matches(inst, t.get<std::string>());
        if (!ok) {
            out.push_back(path + ": expected type " + ty.dump() + ", got " + type_of(inst));
            return;
        }
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& e : schema["enum"]) found = found || e == inst;
        if (!found) out.push_back(path + ": value " + inst.dump() + " not in enum");
    }
    if (schema.contains("minimum") && inst.is_number() && inst.get<double>() < schema["minimum"].get<double>())
        out.push_back(path + ": below minimum");
    if (inst.is_object()) {
        if (schema.contains("required"))
            for (const auto& r : schema["required"])
                if (!inst.contains(r.get<std::string>())) out.push_back(path + ": missing required '" + r.get<std::string>() + "'");
        for (const auto& [k, v] : inst.items()) {
            if (schema.contains("properties") && schema["properties"].contains(k))
                validate_at(v, schema["properties"][k], path + "/" + k, out);
            else if (schema.contains("additionalProperties") && schema["additionalProperties"].is_object())
                validate_at(v, schema["additionalProperties"], path + "/" + k, out);
            else if (schema.contains("additionalProperties") && schema["additionalProperties"] == false)
                out.push_back(path + ": unexpected property '" + k + "'");
        }
    }
    if (inst.is_array() && schema.contains("items"))
        for (std::size_t i = 0; i < inst.size(); ++i) validate_at(inst[i], schema["items"], path + "/" + std::to_string(i), out);
}

void atomic_write(const std::filesystem::path& target, const std::string& content) {
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f << content;
        if (!f) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace

std::vector<std::string> validate(const Json& instance, const Json& schema) {
    std::vector<std::string> out;
    validate_at(instance, schema, "", out);
    return out;
}

std::string version_string() { return "0.1.0"; }

const std::vector<std::string>& operations() {
    static const std::vector<std::string> ops{"spectrum",     "lp-distance", "split",     "scale",
                                              "collapse",     "lds-spectrum", "lds-split", "flowbox"};
    return ops;
}

void ResultRecord::measure(const std::string& name, double value, double stderr_) {
    measured[name] = Json{{"value", number(value)}, {"stderr", number(stderr_)}};
}

void ResultRecord::check(std::string invariant, double measured_value, double bound, bool ok, bool required) {
    checks.push_back(Check{std::move(invariant), bound, measured_value, ok, required});
}

bool ResultRecord::pass() const {
    if (error) return false;
    for (const auto& c : checks)
        if (c.required && !c.pass) return false;
    return true;
}

Json ResultRecord::to_json() const {
    Json j;
    j["schema"] = "cocyclelab.result/1";
    j["operation"] = operation;
    j["config"] = config;
    j["seed"] = seed;
    j["measured"] = measured;
    Json cs = Json::array();
    for (const auto& c : checks)
        cs.push_back(Json{{"invariant", c.invariant},
                          {"bound", number(c.bound)},
                          {"measured", number(c.measured)},
                          {"pass", c.pass},
                          {"required", c.required}});
    j["checks"] = cs;
    j["pass"] = pass();
    j["error"] = error ? Json{{"kind", error->first}, {"message", error->second}} : Json(nullptr);
    j["wall_clock_s"] = wall_clock;
    std::ostringstream eigen;
    eigen << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION;
    j["versions"] = Json{{"cocyclelab", version_string()}, {"eigen", eigen.str()}, {"compiler", __VERSION__}};
    return j;
}

std::string ResultRecord::csv() const {
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < csv_header.size(); ++i) os << (i ? "," : "") << csv_header[i];
    os << "\n";
    for (const auto& row : csv_rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ",";
            if (std::isfinite(row[i])) os << row[i];
        }
        os << "\n";
    }
    return os.str();
}

void write_record(const ResultRecord& rec, const std::string& dir, const std::string& stem, const std::string& format) {
    if (format != "json" && format != "csv") throw ConfigError("output.format: expected json or csv, got '" + format + "'");
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    atomic_write(base / (stem + ".json"), rec.to_json().dump(2) + "\n");
    if (format == "csv") atomic_write(base / (stem + ".csv"), rec.csv());
}

bool SuiteSummary::pass() const {
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

bool SuiteSummary::config_error() const {
    for (const auto& r : rows)
        if (r.config_error) return true;
    return false;
}

std::string SuiteSummary::table() const {
    std::ostringstream os;
    std::size_t w = 4;
    for (const auto& r : rows) w = std::max(w, r.name.size());
    os << std::left << std::setw(static_cast<int>(w)) << "name" << "  status  note\n";
    for (const auto& r : rows)
        os << std::left << std::setw(static_cast<int>(w)) << r.name << "  "
           << (r.config_error ? "CONFIG" : r.pass ? "PASS  " : "FAIL  ") << "  " << r.note << "\n";
    os << rows.size() << " run(s), " << (pass() ? "all passed" : "failures present") << "\n";
    return os.str();
}

}  // namespace cocy::harness
