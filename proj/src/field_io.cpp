#include "stablab/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "stablab/errors.hpp"

namespace stablab {

namespace {

constexpr const char* kMagic = "lab-field";
constexpr int kVersion = 1;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    throw FormatError("bad field value '" + s + "'");
  return v;
}

void check(const GridScalarField& f) {
  std::size_t n = 1;
  for (int n_a : f.nodes) {
    if (n_a <= 0) throw FormatError("node counts must be positive");
    n *= static_cast<std::size_t>(n_a);
  }
  if (n != f.values.size())
    throw FormatError("field has " + std::to_string(f.values.size()) + " values for " +
                      std::to_string(n) + " nodes");
  for (double v : f.values)
    if (!std::isfinite(v)) throw FormatError("field contains a non-finite value");
}

}  // namespace

GridScalarField make_field(const StructuredGrid& grid, std::vector<double> values) {
  GridScalarField f{grid.chart().name, grid.nodes(), grid.spacing(), grid.origin(),
                    std::move(values)};
  check(f);
  return f;
}

GridScalarField make_field(const AxisymmetricSphere& disc, std::vector<double> values) {
  GridScalarField f{"sphere-axisymmetric",
                    {static_cast<int>(disc.size()), 1},
                    {disc.dtheta(), 0.0},
                    {disc.theta(0), 0.0},
                    std::move(values)};
  check(f);
  return f;
}

void write_field_csv(std::ostream& os, const GridScalarField& f) {
  check(f);
  os << "# " << kMagic << ' ' << kVersion << '\n';
  os << "# chart " << f.chart << '\n';
  os << "# nodes";
  for (int n : f.nodes) os << ' ' << n;
  os << "\n# spacing";
  for (double h : f.spacing) os << ' ' << fmt(h);
  os << "\n# origin";
  for (double o : f.origin) os << ' ' << fmt(o);
  os << "\nvalue\n";
  for (double v : f.values) os << fmt(v) << '\n';
}

GridScalarField read_field_csv(std::istream& is) {
  GridScalarField f;
  std::string line;
  const auto header = [&](const std::string& key) {
    if (!std::getline(is, line) || line.rfind("# " + key, 0) != 0)
      throw FormatError("expected header '# " + key + "'");
    std::istringstream ls(line.substr(2 + key.size()));
    return ls.str();
  };
  {
    std::istringstream ls(header(kMagic));
    int version = 0;
    if (!(ls >> version) || version != kVersion)
      throw FormatError("unsupported field version");
  }
  {
    std::string rest = header("chart");
    const auto start = rest.find_first_not_of(' ');
    f.chart = start == std::string::npos ? "" : rest.substr(start);
    if (f.chart.empty()) throw FormatError("missing chart name");
  }
  {
    std::istringstream ls(header("nodes"));
    for (int& n : f.nodes)
      if (!(ls >> n)) throw FormatError("bad nodes header");
  }
  for (const char* key : {"spacing", "origin"}) {
    std::istringstream ls(header(key));
    Vec& target = std::string(key) == "spacing" ? f.spacing : f.origin;
    for (double& x : target) {
      std::string tok;
      if (!(ls >> tok)) throw FormatError(std::string("bad ") + key + " header");
      x = parse_double(tok);
    }
  }
  if (!std::getline(is, line) || line != "value") throw FormatError("expected column header 'value'");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    f.values.push_back(parse_double(line));
  }
  check(f);
  return f;
}

void save_field_csv(const std::string& path, const GridScalarField& f) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  write_field_csv(os, f);
}

GridScalarField load_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open '" + path + "'");
  return read_field_csv(is);
}

std::string field_to_json(const GridScalarField& f) {
  check(f);
  nlohmann::json j;
  j["format"] = kMagic;
  j["version"] = kVersion;
  j["chart"] = f.chart;
  j["nodes"] = f.nodes;
  j["spacing"] = f.spacing;
  j["origin"] = f.origin;
  j["values"] = f.values;
  return j.dump();
}

GridScalarField field_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != kMagic || j.at("version") != kVersion)
      throw FormatError("not a lab-field descriptor");
    GridScalarField f;
    f.chart = j.at("chart").get<std::string>();
    f.nodes = j.at("nodes").get<std::array<int, kDim>>();
    f.spacing = j.at("spacing").get<Vec>();
    f.origin = j.at("origin").get<Vec>();
    f.values = j.at("values").get<std::vector<double>>();
    check(f);
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(e.what());
  }
}

}  // namespace stablab
