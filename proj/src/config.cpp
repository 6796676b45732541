#include "lurk/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lurk/errors.hpp"

namespace lurk {

using nlohmann::json;

namespace {

const std::set<std::string> kTopKeys = {
    "schema", "model", "base_dimensions", "variables", "qoi", "exposed", "lurking", "pinned",
    "design", "nominal", "w_ex", "alpha", "tau", "n", "sweep", "seed", "threads", "case",
    "power", "outputs", "data"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

Rational to_rational(const json& v, const std::string& what) {
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x == std::trunc(x) && std::abs(x) < 9e15) return Rational(static_cast<std::int64_t>(x));
    throw ConfigError(what + ": non-integer exponents must be written as \"num/den\" strings");
  }
  if (v.is_string()) {
    try {
      return Rational::parse(v.get<std::string>());
    } catch (const DomainError& e) {
      throw ConfigError(what + ": " + e.what());
    }
  }
  throw ConfigError(what + ": expected an integer or \"num/den\" string");
}

RationalVector to_dims(const json& v, const std::vector<std::string>& basis, const std::string& what) {
  const auto size = static_cast<Eigen::Index>(basis.size());
  RationalVector out = RationalVector::Zero(size);
  if (v.is_array()) {
    if (static_cast<Eigen::Index>(v.size()) != size) {
      throw ConfigError(what + ": expected " + std::to_string(size) + " exponents");
    }
    for (Eigen::Index i = 0; i < size; ++i) out(i) = to_rational(v[static_cast<std::size_t>(i)], what);
    return out;
  }
  if (v.is_object()) {
    for (const auto& [label, exp] : v.items()) {
      const auto it = std::find(basis.begin(), basis.end(), label);
      if (it == basis.end()) throw ConfigError(what + ": unknown base dimension '" + label + "'");
      out(it - basis.begin()) = to_rational(exp, what);
    }
    return out;
  }
  throw ConfigError(what + ": dims must be an array or an object");
}

std::vector<std::string> string_list(const json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError(what + " must be an array of names");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ConfigError(what + " must contain only strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

Eigen::Index count(const json& v, const std::string& what) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(what + " must be a nonnegative integer");
  }
  return static_cast<Eigen::Index>(v.get<std::int64_t>());
}

/// Values keyed by name or listed in `names` order.
Eigen::VectorXd named_values(const json& v, const std::vector<std::string>& names, const std::string& what) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(names.size()));
  if (v.is_array()) {
    if (v.size() != names.size()) {
      throw ConfigError(what + ": expected " + std::to_string(names.size()) + " values");
    }
    for (std::size_t i = 0; i < names.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i], what);
    return out;
  }
  if (!v.is_object()) throw ConfigError(what + " must be an array or an object keyed by name");
  for (const auto& [key, value] : v.items()) {
    if (std::find(names.begin(), names.end(), key) == names.end()) {
      throw ConfigError(what + ": '" + key + "' is not one of the expected variables");
    }
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!v.contains(names[i])) throw ConfigError(what + ": missing value for '" + names[i] + "'");
    out(static_cast<Eigen::Index>(i)) = number(v[names[i]], what);
  }
  return out;
}

double parse_log_base(const json& v) {
  if (v.is_string() && v.get<std::string>() == "e") return std::numbers::e;
  const double base = number(v, "design.log_base");
  if (!(base > 0.0) || base == 1.0 || !std::isfinite(base)) {
    throw ConfigError("design.log_base must be positive and not 1");
  }
  return base;
}

void sort_by_declaration(std::vector<std::string>& names, const DimMatrix& d) {
  std::sort(names.begin(), names.end(),
            [&](const std::string& a, const std::string& b) { return d.index_of(a) < d.index_of(b); });
}

void resolve_partition(RunConfig& cfg, const json& doc) {
  const auto& declared = cfg.d.variable_names();
  cfg.lurking = doc.contains("lurking") ? string_list(doc["lurking"], "lurking") : std::vector<std::string>{};
  cfg.pinned = doc.contains("pinned") ? string_list(doc["pinned"], "pinned") : std::vector<std::string>{};

  std::map<std::string, std::string> role;
  auto assign = [&](const std::vector<std::string>& names, const std::string& which) {
    for (const auto& name : names) {
      if (std::find(declared.begin(), declared.end(), name) == declared.end()) {
        throw ConfigError(which + " names undeclared variable '" + name + "'");
      }
      const auto [it, inserted] = role.emplace(name, which);
      if (!inserted) {
        throw ConfigError("variable '" + name + "' listed in both " + it->second + " and " + which +
                          (it->second == which ? " (duplicate)" : ""));
      }
    }
  };
  assign(cfg.lurking, "lurking");
  assign(cfg.pinned, "pinned");
  if (doc.contains("exposed")) {
    cfg.exposed = string_list(doc["exposed"], "exposed");
    assign(cfg.exposed, "exposed");
    for (const auto& name : declared) {
      if (!role.contains(name)) throw ConfigError("variable '" + name + "' is not assigned a role");
    }
  } else {
    for (const auto& name : declared) {
      if (!role.contains(name)) cfg.exposed.push_back(name);
    }
  }
  sort_by_declaration(cfg.exposed, cfg.d);
  sort_by_declaration(cfg.lurking, cfg.d);
  sort_by_declaration(cfg.pinned, cfg.d);
}

void parse_declarations(RunConfig& cfg, const json& doc) {
  std::vector<std::string> basis = base_dimensions::mlt();
  if (doc.contains("base_dimensions")) {
    const auto& b = doc["base_dimensions"];
    if (b.is_string() && b.get<std::string>() == "SI") {
      basis = base_dimensions::si();
    } else if (b.is_string() && b.get<std::string>() == "MLT") {
      basis = base_dimensions::mlt();
    } else {
      basis = string_list(b, "base_dimensions");
    }
    if (basis.empty()) throw ConfigError("base_dimensions must not be empty");
    if (std::set<std::string>(basis.begin(), basis.end()).size() != basis.size()) {
      throw ConfigError("duplicate base dimension label");
    }
  }
  if (!doc.contains("variables") || !doc["variables"].is_array()) {
    throw ConfigError("'variables' must be an array of {name, dims} declarations");
  }
  DimMatrix d(basis);
  std::set<std::string> seen;
  for (const auto& var : doc["variables"]) {
    if (!var.is_object() || !var.contains("name") || !var["name"].is_string() || !var.contains("dims")) {
      throw ConfigError("each variable needs a string 'name' and 'dims'");
    }
    reject_unknown(var, {"name", "dims"}, "variable declaration");
    const auto name = var["name"].get<std::string>();
    if (name.empty()) throw ConfigError("variable names must be nonempty");
    if (!seen.insert(name).second) throw ConfigError("variable '" + name + "' declared twice");
    d.append(name, DimVector(to_dims(var["dims"], basis, "variable '" + name + "'"), basis));
  }
  if (!doc.contains("qoi") || !doc["qoi"].is_object() || !doc["qoi"].contains("dims")) {
    throw ConfigError("'qoi' must be an object with 'dims'");
  }
  reject_unknown(doc["qoi"], {"name", "dims"}, "qoi");
  cfg.qoi_name = doc["qoi"].value("name", std::string("q"));
  cfg.dq = DimVector(to_dims(doc["qoi"]["dims"], basis, "qoi"), basis);
  cfg.d = std::move(d);
}

std::optional<std::filesystem::path> path_field(const json& obj, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  if (!obj[key].is_string()) throw ConfigError(std::string("path '") + key + "' must be a string");
  return std::filesystem::path(obj[key].get<std::string>());
}

} // namespace

RunConfig RunConfig::parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, kTopKeys, "config");
  if (!doc.contains("schema") || !doc["schema"].is_number_integer() || doc["schema"].get<int>() != 1) {
    throw ConfigError("config must declare \"schema\": 1");
  }

  RunConfig cfg;
  try {
    if (doc.contains("model")) {
      if (!doc["model"].is_string()) throw ConfigError("'model' must be a string");
      for (const char* key : {"base_dimensions", "variables", "qoi"}) {
        if (doc.contains(key)) {
          throw ConfigError(std::string("'") + key + "' cannot be combined with a registered model");
        }
      }
      const ModelSpec& spec = find_model(doc["model"].get<std::string>());
      cfg.model = spec.name;
      cfg.d = spec.d;
      cfg.qoi_name = spec.qoi_name;
      cfg.dq = spec.dq;
      cfg.log_base = spec.log_base;
    } else {
      parse_declarations(cfg, doc);
    }
    resolve_partition(cfg, doc);

    if (doc.contains("design")) {
      const auto& design = doc["design"];
      if (!design.is_object()) throw ConfigError("'design' must be an object");
      reject_unknown(design, {"log_base", "mu", "sigma"}, "design");
      if (!design.contains("mu") || !design.contains("sigma")) {
        throw ConfigError("design needs both 'mu' and 'sigma'");
      }
      if (design.contains("log_base")) cfg.log_base = parse_log_base(design["log_base"]);
      Eigen::VectorXd mu = named_values(design["mu"], cfg.exposed, "design.mu");
      Eigen::VectorXd sigma = named_values(design["sigma"], cfg.exposed, "design.sigma");
      if ((sigma.array() <= 0.0).any()) throw ConfigError("design.sigma entries must be positive");
      cfg.design = GaussianDesign(std::move(mu), std::move(sigma));
    } else if (cfg.model) {
      const ModelSpec& spec = find_model(*cfg.model);
      ExperimentSetup setup;
      for (const auto& name : cfg.exposed) setup.exposed.push_back(spec.index_of(name));
      cfg.design = setup.design(spec);
    }

    if (doc.contains("nominal")) {
      if (!cfg.model) throw ConfigError("'nominal' applies only to registered models");
      const auto& nominal = doc["nominal"];
      Eigen::VectorXd values = find_model(*cfg.model).nominal_log;
      if (!nominal.is_object()) throw ConfigError("'nominal' must be an object keyed by name");
      for (const auto& [key, value] : nominal.items()) {
        const auto& names = cfg.d.variable_names();
        if (std::find(names.begin(), names.end(), key) == names.end()) {
          throw ConfigError("nominal names undeclared variable '" + key + "'");
        }
        values(cfg.d.index_of(key)) = number(value, "nominal." + key);
      }
      cfg.nominal_log = std::move(values);
    }

    if (doc.contains("w_ex")) {
      const auto& w = doc["w_ex"];
      RationalVector values(static_cast<Eigen::Index>(cfg.exposed.size()));
      if (w.is_array()) {
        if (w.size() != cfg.exposed.size()) throw ConfigError("w_ex length differs from exposed count");
        for (std::size_t i = 0; i < w.size(); ++i) values(static_cast<Eigen::Index>(i)) = to_rational(w[i], "w_ex");
      } else if (w.is_object()) {
        for (std::size_t i = 0; i < cfg.exposed.size(); ++i) {
          if (!w.contains(cfg.exposed[i])) throw ConfigError("w_ex misses '" + cfg.exposed[i] + "'");
          values(static_cast<Eigen::Index>(i)) = to_rational(w[cfg.exposed[i]], "w_ex");
        }
        if (w.size() != cfg.exposed.size()) throw ConfigError("w_ex names a non-exposed variable");
      } else {
        throw ConfigError("w_ex must be an array or an object");
      }
      cfg.w_ex = std::move(values);
    }

    if (doc.contains("alpha")) cfg.alpha = number(doc["alpha"], "alpha");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (doc.contains("tau")) cfg.tau = number(doc["tau"], "tau");
    if (!(cfg.tau >= 0.0) || !std::isfinite(cfg.tau)) throw ConfigError("tau must be finite and >= 0");
    if (doc.contains("n")) cfg.n = count(doc["n"], "n");
    if (doc.contains("seed")) {
      if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
      cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("threads")) cfg.threads = static_cast<int>(count(doc["threads"], "threads"));
    if (doc.contains("case")) {
      if (!doc["case"].is_string()) throw ConfigError("'case' must be a string");
      cfg.case_name = doc["case"].get<std::string>();
    }

    cfg.sweep_n = {cfg.n};
    cfg.sweep_tau = {cfg.tau};
    if (doc.contains("sweep")) {
      const auto& sweep = doc["sweep"];
      if (!sweep.is_object()) throw ConfigError("'sweep' must be an object");
      reject_unknown(sweep, {"n", "tau", "replications"}, "sweep");
      if (sweep.contains("n")) {
        if (!sweep["n"].is_array()) throw ConfigError("sweep.n must be an array");
        cfg.sweep_n.clear();
        for (const auto& v : sweep["n"]) cfg.sweep_n.push_back(count(v, "sweep.n"));
      }
      if (sweep.contains("tau")) {
        if (!sweep["tau"].is_array()) throw ConfigError("sweep.tau must be an array");
        cfg.sweep_tau.clear();
        for (const auto& v : sweep["tau"]) cfg.sweep_tau.push_back(number(v, "sweep.tau"));
      }
      if (sweep.contains("replications")) {
        cfg.replications = static_cast<long>(count(sweep["replications"], "sweep.replications"));
      }
    }

    if (doc.contains("power")) {
      const auto& power = doc["power"];
      if (!power.is_object()) throw ConfigError("'power' must be an object");
      reject_unknown(power, {"k", "d", "n"}, "power");
      if (power.contains("k")) cfg.power_k = number(power["k"], "power.k");
      if (power.contains("d")) cfg.power_d = count(power["d"], "power.d");
      if (power.contains("n")) {
        if (!power["n"].is_array()) throw ConfigError("power.n must be an array");
        for (const auto& v : power["n"]) cfg.power_n.push_back(count(v, "power.n"));
      }
    }

    cfg.data_path = path_field(doc, "data");
    if (doc.contains("outputs")) {
      const auto& outputs = doc["outputs"];
      if (!outputs.is_object()) throw ConfigError("'outputs' must be an object");
      reject_unknown(outputs, {"report", "csv", "ecdf", "data"}, "outputs");
      cfg.report_path = path_field(outputs, "report");
      cfg.csv_path = path_field(outputs, "csv");
      cfg.ecdf_path = path_field(outputs, "ecdf");
      if (auto data = path_field(outputs, "data")) cfg.data_path = data;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ModelSpec RunConfig::model_spec() const {
  if (!model) throw ConfigError("this command needs a registered 'model'");
  ModelSpec spec = find_model(*model);
  if (nominal_log) spec.nominal_log = *nominal_log;
  spec.log_base = log_base;
  return spec;
}

ExperimentSetup RunConfig::setup(const ModelSpec& spec) const {
  ExperimentSetup s;
  for (const auto& name : exposed) s.exposed.push_back(spec.index_of(name));
  for (const auto& name : lurking) s.lurking.push_back(spec.index_of(name));
  for (const auto& name : pinned) s.pinned.push_back(spec.index_of(name));
  s.tau = tau;
  s.design_override = design;
  s.validate(spec);
  return s;
}

DetectionConfig RunConfig::detection() const {
  if (!design) throw ConfigError("detection needs a sampling design (design.mu, design.sigma)");
  std::optional<DimMatrix> d_pin;
  if (!pinned.empty()) d_pin = d_pinned();
  DetectionConfig cfg = DetectionConfig::canonical(d_exposed(), dq, *design, alpha, d_pin, log_base);
  if (w_ex) {
    cfg.w_ex = *w_ex;
    cfg.validate(dq);
  }
  return cfg;
}

SweepConfig RunConfig::sweep() const {
  SweepConfig s;
  s.model_spec = model_spec();
  s.model = s.model_spec->name;
  s.setup = setup(*s.model_spec);
  s.n_grid = sweep_n;
  s.tau_grid = sweep_tau;
  s.replications = replications;
  s.alpha = alpha;
  s.seed = seed;
  s.parallelism = threads;
  s.case_name = case_name;
  return s;
}

Eigen::Index DataTable::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("data has no column '" + std::string(name) + "'");
  return it - columns.begin();
}

void DataTable::require(const std::vector<std::string>& required) const {
  (void)column(qoi_column);
  for (const auto& name : required) (void)column(name);
}

std::string DataTable::to_csv() const {
  std::string out;
  for (std::size_t j = 0; j < columns.size(); ++j) out += (j ? "," : "") + columns[j];
  out += '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out += (j ? "," : "") + format_double(values(i, j));
    out += '\n';
  }
  return out;
}

DataTable DataTable::parse_csv(const std::string& text, std::string qoi_column) {
  DataTable t;
  t.qoi_column = std::move(qoi_column);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("data file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::istringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) t.columns.push_back(name);
  }
  if (std::set<std::string>(t.columns.begin(), t.columns.end()).size() != t.columns.size()) {
    throw IoError("duplicate column name in data header");
  }
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      double v = 0.0;
      try {
        v = parse_double(field);
      } catch (const IoError&) {
        throw IoError("data line " + std::to_string(line_no) + ": invalid value '" + field + "'");
      }
      if (!std::isfinite(v)) throw IoError("data line " + std::to_string(line_no) + ": non-finite value");
      row.push_back(v);
    }
    if (line.back() == ',') throw IoError("data line " + std::to_string(line_no) + ": missing value");
    if (row.size() != t.columns.size()) {
      throw IoError("data line " + std::to_string(line_no) + ": expected " +
                    std::to_string(t.columns.size()) + " values");
    }
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return t;
}

void DataTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << to_csv();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

DataTable DataTable::read(const std::filesystem::path& path, std::string qoi_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open data '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str(), std::move(qoi_column));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

namespace {

std::string join_vector(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v(i));
  return out;
}

Eigen::VectorXd split_vector(const std::string& text) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) values.push_back(parse_double(field));
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

} // namespace

std::string format_report(const TestReport& r, std::uint64_t seed) {
  std::string out;
  out += "seed=" + std::to_string(seed) + '\n';
  out += "n=" + std::to_string(r.n) + '\n';
  out += "dof_num=" + std::to_string(r.dof_num) + '\n';
  out += "dof_den=" + std::to_string(r.dof_den) + '\n';
  out += "t2=" + format_double(r.t2) + '\n';
  out += "critical=" + format_double(r.critical) + '\n';
  out += "p_value=" + format_double(r.p_value) + '\n';
  out += "alpha=" + format_double(r.alpha) + '\n';
  out += std::string("reject=") + (r.reject ? "true" : "false") + '\n';
  out += std::string("pinned=") + (r.pinned ? "true" : "false") + '\n';
  out += "nu_hat=" + join_vector(r.nu_hat) + '\n';
  out += "nu_hat_unit=" + (r.nu_hat_unit ? join_vector(*r.nu_hat_unit) : std::string()) + '\n';
  return out;
}

TestReport parse_report(const std::string& text, std::uint64_t* seed) {
  TestReport r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("report line without '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "seed") {
      if (seed) *seed = std::stoull(value);
    } else if (key == "n") {
      r.n = std::stol(value);
    } else if (key == "dof_num") {
      r.dof_num = std::stoi(value);
    } else if (key == "dof_den") {
      r.dof_den = std::stoi(value);
    } else if (key == "t2") {
      r.t2 = parse_double(value);
    } else if (key == "critical") {
      r.critical = parse_double(value);
    } else if (key == "p_value") {
      r.p_value = parse_double(value);
    } else if (key == "alpha") {
      r.alpha = parse_double(value);
    } else if (key == "reject") {
      r.reject = value == "true";
    } else if (key == "pinned") {
      r.pinned = value == "true";
    } else if (key == "nu_hat") {
      r.nu_hat = split_vector(value);
    } else if (key == "nu_hat_unit") {
      if (!value.empty()) r.nu_hat_unit = split_vector(value);
    } else {
      throw IoError("unknown report key '" + key + "'");
    }
  }
  return r;
}

} // namespace lurk
