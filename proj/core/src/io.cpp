#include "halos/io.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace halos {

using nlohmann::json;

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

namespace {

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  return f;
}

// Splits one CSV line; no quoting, the formats here never need it.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool looks_numeric(const std::string& s) {
  return !s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-' || s[0] == '+' ||
                        s[0] == '.');
}

}  // namespace

void write_surface_json(std::ostream& os, const DiscreteSurface& s) {
  json j;
  j["vertices"] = s.n_vertices;
  j["triangles"] = s.triangles;
  j["edge_lengths"] = s.edge_lengths;
  j["boundary_loops"] = s.boundary_loops;
  j["node_classes"] = s.node_classes;
  if (s.has_planar())
    j["planar_coords"] = s.planar_coords;
  else
    j["planar_coords"] = nullptr;
  j["planar_periods"] = s.planar_periods;
  os << j.dump(1) << '\n';
}

void write_surface_json(const std::string& path, const DiscreteSurface& s) {
  auto f = open_out(path);
  write_surface_json(f, s);
}

DiscreteSurface read_surface_json(std::istream& is) {
  const json j = json::parse(is);
  DiscreteSurface s;
  s.n_vertices = j.at("vertices").get<Index>();
  s.triangles = j.at("triangles").get<std::vector<std::array<Index, 3>>>();
  s.enumerate_edges();
  const auto lengths = j.at("edge_lengths").get<std::vector<double>>();
  if (lengths.size() != s.edges.size())
    throw std::runtime_error(fmt::format("edge_lengths has {} entries, surface has {} edges",
                                         lengths.size(), s.edges.size()));
  s.edge_lengths = lengths;
  if (j.contains("boundary_loops")) s.boundary_loops = j.at("boundary_loops").get<std::vector<std::vector<Index>>>();
  if (j.contains("node_classes")) s.node_classes = j.at("node_classes").get<std::vector<std::vector<Index>>>();
  if (j.contains("planar_coords") && !j.at("planar_coords").is_null())
    s.planar_coords = j.at("planar_coords").get<std::vector<std::array<double, 2>>>();
  if (j.contains("planar_periods"))
    s.planar_periods = j.at("planar_periods").get<std::array<std::array<double, 2>, 2>>();
  s.finalize();
  return s;
}

DiscreteSurface read_surface_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  return read_surface_json(f);
}

void write_charges_json(std::ostream& os, const ChargeSet& c) {
  json j = json::array();
  for (std::size_t k = 0; k < c.vertices.size(); ++k)
    j.push_back({{"vertex", c.vertices[k]}, {"q", complex_to_json(c.q[static_cast<Eigen::Index>(k)])}});
  os << j.dump(1) << '\n';
}

ChargeSet read_charges_json(std::istream& is) {
  const json j = json::parse(is);
  ChargeSet c;
  c.q.resize(static_cast<Eigen::Index>(j.size()));
  Eigen::Index k = 0;
  for (const auto& row : j) {
    c.vertices.push_back(row.at("vertex").get<Index>());
    const auto q = row.at("q").get<std::array<double, 2>>();
    c.q[k++] = Complex(q[0], q[1]);
  }
  return c;
}

void write_charges_csv(std::ostream& os, const ChargeSet& c) {
  os << "vertex,q_re,q_im\n";
  for (std::size_t k = 0; k < c.vertices.size(); ++k) {
    const Complex q = c.q[static_cast<Eigen::Index>(k)];
    os << fmt::format("{},{},{}\n", c.vertices[k], format_double(q.real()), format_double(q.imag()));
  }
}

void write_error_report_json(std::ostream& os, const ErrorReport& r) {
  json j;
  j["sup_c0"] = r.sup_c0;
  j["sup_c1"] = r.sup_c1;
  j["l1_residue"] = r.l1_residue;
  j["epsilon"] = r.epsilon;
  j["n_charges"] = r.n_charges;
  os << j.dump(1) << '\n';
}

void write_residues_csv(std::ostream& os, const std::vector<ResidueRow>& rows) {
  os << "vertex,declared_re,declared_im,measured_re,measured_im\n";
  for (const auto& r : rows)
    os << fmt::format("{},{},{},{},{}\n", r.vertex, format_double(r.declared.real()),
                      format_double(r.declared.imag()), format_double(r.measured.real()),
                      format_double(r.measured.imag()));
}

void write_fields_csv(std::ostream& os, const DiscreteSurface& s,
                      const std::vector<std::pair<std::string, Cochain0>>& fields) {
  if (!s.has_planar()) throw std::runtime_error("fields CSV needs planar coordinates");
  for (const auto& [name, f] : fields)
    if (f.v.size() != s.n_vertices) throw std::runtime_error(fmt::format("field '{}' size mismatch", name));
  os << "vertex,x,y";
  for (const auto& [name, f] : fields) os << fmt::format(",{}_re,{}_im", name, name);
  os << '\n';
  for (Index v = 0; v < s.n_vertices; ++v) {
    const auto& p = s.planar_coords[static_cast<std::size_t>(v)];
    os << fmt::format("{},{},{}", v, format_double(p[0]), format_double(p[1]));
    for (const auto& [name, f] : fields) {
      const Complex z = f.v[v];
      os << fmt::format(",{},{}", format_double(z.real()), format_double(z.imag()));
    }
    os << '\n';
  }
}

std::vector<std::pair<std::string, Cochain0>> read_fields_csv(std::istream& is, Index n_vertices) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("fields CSV is empty");
  const auto header = split_csv(line);
  if (header.size() < 5 || header[0] != "vertex")
    throw std::runtime_error("fields CSV header must be vertex,x,y,<name>_re,<name>_im,...");
  if ((header.size() - 3) % 2 != 0) throw std::runtime_error("fields CSV has an odd column count");

  std::vector<std::pair<std::string, Cochain0>> fields;
  for (std::size_t c = 3; c < header.size(); c += 2) {
    std::string name = header[c];
    if (name.size() < 4 || name.substr(name.size() - 3) != "_re")
      throw std::runtime_error(fmt::format("unexpected fields CSV column '{}'", name));
    name.resize(name.size() - 3);
    Cochain0 f;
    f.v = Eigen::VectorXcd::Zero(n_vertices);
    fields.emplace_back(std::move(name), std::move(f));
  }

  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw std::runtime_error("fields CSV row width mismatch");
    const Index v = static_cast<Index>(std::stol(cells[0]));
    if (v < 0 || v >= n_vertices) throw std::runtime_error(fmt::format("fields CSV vertex {} out of range", v));
    for (std::size_t k = 0; k < fields.size(); ++k)
      fields[k].second.v[v] = Complex(std::stod(cells[3 + 2 * k]), std::stod(cells[4 + 2 * k]));
    ++rows;
  }
  if (rows != static_cast<std::size_t>(n_vertices))
    throw std::runtime_error(fmt::format("fields CSV has {} rows, surface has {} vertices", rows, n_vertices));
  return fields;
}

void write_indicatrix_csv(std::ostream& os, const IndicatrixGrid& g) {
  os << "xi0_re,xi0_im,xi1,g_re,g_im,winding,valid\n";
  for (std::size_t j = 0; j < g.n1(); ++j) {
    for (std::size_t i = 0; i < g.n0(); ++i) {
      const auto& v = g.at(i, j);
      os << fmt::format("{},{},{},{},{},{},{}\n", format_double(g.xi0[i]), format_double(0.0),
                        format_double(g.xi1[j]), format_double(v.g.real()), format_double(v.g.imag()),
                        v.winding, v.valid ? 1 : 0);
    }
  }
}

BoundaryFunctions read_boundary_functions_csv(std::istream& is) {
  BoundaryFunctions bf;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (first && !looks_numeric(cells[0])) {
      first = false;
      continue;  // header row
    }
    first = false;
    if (cells.size() != 4) throw std::runtime_error("contour CSV rows must be f1_re,f1_im,f2_re,f2_im");
    bf.f1.emplace_back(std::stod(cells[0]), std::stod(cells[1]));
    bf.f2.emplace_back(std::stod(cells[2]), std::stod(cells[3]));
  }
  if (bf.size() < 12) throw std::runtime_error("contour CSV needs at least 12 samples");
  return bf;
}

void write_predicates_json(std::ostream& os, const PredicateReport& rep) {
  json j;
  j["boundary_nonvanishing"] = rep.boundary_nonvanishing;
  j["immersion"] = rep.immersion;
  j["boundary_injective"] = rep.boundary_injective;
  j["proper"] = rep.proper;
  j["boundary_margin"] = rep.boundary_margin;
  j["immersion_margin"] = rep.immersion_margin;
  j["injective_margin"] = rep.injective_margin;
  j["proper_margin"] = rep.proper_margin;
  j["collision_threshold"] = rep.collision_threshold;
  j["n_interior_clusters"] = rep.n_interior_clusters;
  j["verdict"] = verdict_name(rep.verdict);
  j["reason"] = rep.reason;
  json clusters = json::array();
  for (const auto& c : rep.exceptional)
    clusters.push_back({{"faces", c.faces},
                        {"touches_boundary", c.touches_boundary},
                        {"min_distance", c.min_distance}});
  j["exceptional"] = clusters;
  os << j.dump(1) << '\n';
}

}  // namespace halos
