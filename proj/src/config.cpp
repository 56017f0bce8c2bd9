#include "pphi2/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace pphi2 {

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  auto end = s.find_last_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + msg);
}

[[noreturn]] void validate_fail(const std::string& field,
                                const std::string& msg) {
  fail(ErrorCode::ValidationError, field + ": " + msg);
}

double to_double(const std::string& value, const std::string& field) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    validate_fail(field, "expected a number, got '" + value + "'");
  }
}

long long to_int(const std::string& value, const std::string& field) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    validate_fail(field, "expected an integer, got '" + value + "'");
  }
}

std::vector<double> to_array(const std::string& value,
                             const std::string& field) {
  std::string v = trim(value);
  if (v.empty() || v.front() != '[' || v.back() != ']')
    validate_fail(field, "expected an array like [0, 0, 1]");
  std::vector<double> out;
  std::string inner = v.substr(1, v.size() - 2);
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) validate_fail(field, "empty array entry");
    out.push_back(to_double(item, field));
  }
  if (out.empty()) validate_fail(field, "array must not be empty");
  return out;
}

}  // namespace

CylinderLattice RunConfig::lattice() const {
  return build_lattice(beta, half_length, n_alpha, n_x, mass, dispersion);
}

WickPolynomial RunConfig::interaction() const {
  double constant = 0;
  switch (ordering) {
    case WickLabel::CFull:
      constant = lattice_wick_constant(spectral_multipliers(lattice()));
      break;
    case WickLabel::CZero:
      constant = lattice_c0_constant(lattice());
      break;
    case WickLabel::CBeta:
      constant = lattice_cbeta_constant(lattice());
      break;
    case WickLabel::Custom:
      constant = custom_wick_constant;
      break;
  }
  return make_wick_polynomial(coefficients, constant, ordering);
}

MeasureSpec RunConfig::measure_spec() const {
  return make_measure_spec(lattice(), interaction(), cutoff_l, estimator,
                           ordering != WickLabel::CFull);
}

RunParams RunConfig::run_params() const {
  return RunParams{seed, samples, sweeps, burn_in, thin, 0};
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "[lattice]\n";
  os << "beta = " << beta << "\n";
  os << "half_length = " << half_length << "\n";
  os << "n_alpha = " << n_alpha << "\n";
  os << "n_x = " << n_x << "\n";
  os << "mass = " << mass << "\n";
  os << "dispersion = "
     << (dispersion == Dispersion::LatticeLaplacian ? "lattice" : "continuum")
     << "\n\n";
  os << "[interaction]\n";
  os << "coefficients = [";
  for (std::size_t i = 0; i < coefficients.size(); ++i)
    os << (i ? ", " : "") << coefficients[i];
  os << "]\n";
  switch (ordering) {
    case WickLabel::CFull: os << "ordering = full\n"; break;
    case WickLabel::CZero: os << "ordering = czero\n"; break;
    case WickLabel::CBeta: os << "ordering = cbeta\n"; break;
    case WickLabel::Custom:
      os << "ordering = custom\n";
      os << "wick_constant = " << custom_wick_constant << "\n";
      break;
  }
  os << "cutoff_l = " << cutoff_l << "\n";
  os << "estimator = "
     << (estimator == EstimatorKind::Reweighting ? "reweighting"
                                                 : "metropolis")
     << "\n\n";
  os << "[run]\n";
  os << "seed = " << seed << "\n";
  os << "samples = " << samples << "\n";
  os << "sweeps = " << sweeps << "\n";
  os << "burn_in = " << burn_in << "\n";
  os << "thin = " << thin << "\n";
  os << "threads = " << threads << "\n";
  os << "out = " << out_dir << "\n\n";
  os << "[battery]\n";
  os << "tolerance_scale = " << tolerance_scale << "\n";
  return os.str();
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(line_no, "unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "lattice" && section != "interaction" &&
          section != "run" && section != "battery")
        parse_fail(line_no, "unknown section '" + section + "'");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(line_no, "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) parse_fail(line_no, "missing key");
    if (value.empty()) parse_fail(line_no, "missing value for '" + key + "'");
    std::string field = section + "." + key;

    if (section == "lattice") {
      if (key == "beta") config.beta = to_double(value, field);
      else if (key == "half_length") config.half_length = to_double(value, field);
      else if (key == "n_alpha") config.n_alpha = static_cast<int>(to_int(value, field));
      else if (key == "n_x") config.n_x = static_cast<int>(to_int(value, field));
      else if (key == "mass") config.mass = to_double(value, field);
      else if (key == "dispersion") {
        if (value == "lattice") config.dispersion = Dispersion::LatticeLaplacian;
        else if (value == "continuum") config.dispersion = Dispersion::ContinuumModes;
        else validate_fail(field, "must be 'lattice' or 'continuum'");
      } else parse_fail(line_no, "unknown key '" + key + "'");
    } else if (section == "interaction") {
      if (key == "coefficients") config.coefficients = to_array(value, field);
      else if (key == "ordering") {
        if (value == "full") config.ordering = WickLabel::CFull;
        else if (value == "czero") config.ordering = WickLabel::CZero;
        else if (value == "cbeta") config.ordering = WickLabel::CBeta;
        else if (value == "custom") config.ordering = WickLabel::Custom;
        else validate_fail(field, "must be full, czero, cbeta or custom");
      } else if (key == "wick_constant")
        config.custom_wick_constant = to_double(value, field);
      else if (key == "cutoff_l") config.cutoff_l = to_double(value, field);
      else if (key == "estimator") {
        if (value == "reweighting") config.estimator = EstimatorKind::Reweighting;
        else if (value == "metropolis") config.estimator = EstimatorKind::Metropolis;
        else validate_fail(field, "must be 'reweighting' or 'metropolis'");
      } else parse_fail(line_no, "unknown key '" + key + "'");
    } else if (section == "run") {
      if (key == "seed") config.seed = static_cast<std::uint64_t>(to_int(value, field));
      else if (key == "samples") config.samples = static_cast<int>(to_int(value, field));
      else if (key == "sweeps") config.sweeps = static_cast<int>(to_int(value, field));
      else if (key == "burn_in") config.burn_in = static_cast<int>(to_int(value, field));
      else if (key == "thin") config.thin = static_cast<int>(to_int(value, field));
      else if (key == "threads") config.threads = static_cast<int>(to_int(value, field));
      else if (key == "out") config.out_dir = value;
      else parse_fail(line_no, "unknown key '" + key + "'");
    } else if (section == "battery") {
      if (key == "tolerance_scale") config.tolerance_scale = to_double(value, field);
      else parse_fail(line_no, "unknown key '" + key + "'");
    } else {
      parse_fail(line_no, "key outside any section");
    }
  }

  // Fail fast: all module invariants checked here, named per field.
  if (config.beta <= 0) validate_fail("lattice.beta", "must be > 0");
  if (config.half_length <= 0)
    validate_fail("lattice.half_length", "must be > 0");
  if (config.mass <= 0) validate_fail("lattice.mass", "must be > 0");
  if (config.n_alpha < 4 || config.n_x < 4)
    validate_fail("lattice.n_alpha", "need at least 4 sites per direction");
  if (config.n_alpha % 2 != 0 || config.n_x % 2 != 0)
    validate_fail("lattice.n_alpha", "site counts must be even");
  try {
    config.lattice();
  } catch (const Error& e) {
    validate_fail("lattice", e.what());
  }
  try {
    config.interaction();
  } catch (const Error& e) {
    validate_fail("interaction.coefficients", e.what());
  }
  if (config.cutoff_l <= 0 || config.cutoff_l > config.half_length)
    validate_fail("interaction.cutoff_l", "need 0 < l <= half_length");
  if (config.samples < 100) validate_fail("run.samples", "need >= 100");
  if (config.sweeps <= config.burn_in)
    validate_fail("run.sweeps", "need sweeps > burn_in");
  if (config.thin < 1) validate_fail("run.thin", "need thin >= 1");
  if (config.threads < 1) validate_fail("run.threads", "need threads >= 1");
  if (config.tolerance_scale <= 0 && config.tolerance_scale != 0)
    validate_fail("battery.tolerance_scale", "must be >= 0");
  return config;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ParseError, "cannot open config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace pphi2
