#include "pdsel/reports.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "pdsel/dataset.hpp"

namespace pdsel {

using nlohmann::json;

namespace {

json interval_json(const Interval& ci) {
  return json{{"lower", ci.lower}, {"upper", ci.upper}};
}

std::string finish(json j) { return j.dump(2) + "\n"; }

const char* type_name(const json& v) {
  switch (v.type()) {
    case json::value_t::object: return "object";
    case json::value_t::array: return "array";
    case json::value_t::string: return "string";
    case json::value_t::boolean: return "boolean";
    case json::value_t::null: return "null";
    case json::value_t::number_integer:
    case json::value_t::number_unsigned: return "integer";
    default: return "number";
  }
}

bool matches_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  return false;
}

void check(const json& value, const json& schema, const std::string& path,
           std::vector<std::string>& errors) {
  if (!schema.is_object()) {
    errors.push_back(path + ": schema node is not an object");
    return;
  }
  if (schema.contains("const") && value != schema["const"]) {
    errors.push_back(path + ": value does not equal the required constant " +
                     schema["const"].dump());
    return;
  }
  if (schema.contains("enum")) {
    bool hit = false;
    for (const json& option : schema["enum"]) hit = hit || value == option;
    if (!hit) {
      errors.push_back(path + ": value " + value.dump() +
                       " is not one of the allowed alternatives");
      return;
    }
  }
  if (schema.contains("type")) {
    const json& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = matches_type(value, t.get<std::string>());
    } else if (t.is_array()) {
      for (const json& alt : t)
        ok = ok || (alt.is_string() && matches_type(value, alt.get<std::string>()));
    }
    if (!ok) {
      errors.push_back(path + ": expected type " + t.dump() + ", found " +
                       type_name(value));
      return;
    }
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const json& key : schema["required"])
        if (!key.is_string() || !value.contains(key.get<std::string>()))
          errors.push_back(path + ": missing required key " + key.dump());
    if (schema.contains("properties"))
      for (const auto& [key, sub] : schema["properties"].items())
        if (value.contains(key)) check(value.at(key), sub, path + "/" + key, errors);
    if (schema.contains("additionalProperties") &&
        schema["additionalProperties"].is_boolean() &&
        !schema["additionalProperties"].get<bool>()) {
      for (const auto& item : value.items())
        if (!schema.contains("properties") ||
            !schema["properties"].contains(item.key()))
          errors.push_back(path + ": unexpected key \"" + item.key() + "\"");
    }
  }
  if (value.is_array() && schema.contains("items")) {
    std::size_t i = 0;
    for (const json& element : value) {
      check(element, schema["items"], path + "/" + std::to_string(i), errors);
      ++i;
    }
  }
}

}  // namespace

std::string render_estimation_report(const EstimationReport& report) {
  json j{
      {"schema", "estimation_report"},
      {"schema_version", kReportSchemaVersion},
      {"alpha_hat", report.alpha_hat},
      {"sigma_n", report.sigma_n},
      {"se_plugin", report.se_plugin},
      {"se_jackknife", report.se_jackknife},
      {"ci_plugin", interval_json(report.ci_plugin)},
      {"ci_jackknife", interval_json(report.ci_jackknife)},
      {"selected_for_treatment", report.selected_for_treatment},
      {"selected_for_outcome", report.selected_for_outcome},
      {"amelioration", report.amelioration},
      {"union_size", report.union_size},
      {"n_used", report.n_used},
      {"rows_dropped", report.rows_dropped},
      {"rank_deficient", report.rank_deficient},
      {"config",
       {{"c", report.c},
        {"gamma", report.gamma},
        {"selector", report.selector},
        {"level", report.level},
        {"seed", report.seed}}},
  };
  return finish(std::move(j));
}

std::string render_simulation_report(const SimulationReport& report) {
  json estimators = json::array();
  for (const EstimatorSummary& s : report.estimators) {
    estimators.push_back(json{
        {"estimator", s.estimator},
        {"rmse", s.rmse},
        {"bias", s.bias},
        {"std", s.std_dev},
        {"rejection_rate", s.rejection_rate},
        {"successes", s.successes},
        {"exclusions", s.exclusions},
    });
  }
  json j{
      {"schema", "simulation_report"},
      {"schema_version", kReportSchemaVersion},
      {"design", report.design},
      {"r2_y", report.r2_y},
      {"r2_d", report.r2_d},
      {"replications", report.replications},
      {"seed", report.seed},
      {"estimators", std::move(estimators)},
  };
  return finish(std::move(j));
}

std::string render_sparse_eig_report(const SparseEigReport& report) {
  json j{
      {"schema", "sparse_eig_report"},
      {"schema_version", kReportSchemaVersion},
      {"m", report.m},
      {"phi_min", report.phi_min},
      {"phi_max", report.phi_max},
      {"method", report.method},
      {"subsets", report.subsets},
  };
  return finish(std::move(j));
}

std::string simulation_table_csv(const std::vector<SimulationReport>& reports) {
  std::ostringstream out;
  out << "design,r2_y,r2_d,estimator,rmse,bias,std,rejection_rate,reps,"
         "exclusions\n";
  for (const SimulationReport& report : reports)
    for (const EstimatorSummary& s : report.estimators)
      out << report.design << ',' << format_double(report.r2_y) << ','
          << format_double(report.r2_d) << ',' << s.estimator << ','
          << format_double(s.rmse) << ',' << format_double(s.bias) << ','
          << format_double(s.std_dev) << ',' << format_double(s.rejection_rate)
          << ',' << report.replications << ',' << s.exclusions << '\n';
  return out.str();
}

std::vector<std::string> validate_json(const std::string& document,
                                       const std::string& schema) {
  std::vector<std::string> errors;
  const json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded()) {
    errors.push_back("document is not valid JSON");
    return errors;
  }
  const json sch = json::parse(schema, nullptr, false);
  if (sch.is_discarded()) {
    errors.push_back("schema is not valid JSON");
    return errors;
  }
  check(doc, sch, "#", errors);
  return errors;
}

}  // namespace pdsel
