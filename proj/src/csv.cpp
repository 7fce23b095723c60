#include "dirac/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dirac::csv {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

void append_row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    out += num(v);
    first = false;
  }
  out += '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto a = cell.find_first_not_of(" \t");
    const auto b = cell.find_last_not_of(" \t");
    cells.push_back(a == std::string::npos ? std::string() : cell.substr(a, b - a + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string location(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open file for reading", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open file for writing", path);
  out << content;
  if (!out) throw Error(ErrorKind::io, "write failed", path);
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw Error(ErrorKind::parse, "missing column " + name);
}

Table parse_table(const std::string& text, const std::string& source) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw Error(ErrorKind::parse, "wrong number of fields", location(source, lineno));
    }
    std::vector<double> row(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const std::string& c = cells[k];
      const auto res = std::from_chars(c.data(), c.data() + c.size(), row[k]);
      if (c.empty() || res.ec != std::errc() || res.ptr != c.data() + c.size() || !std::isfinite(row[k])) {
        throw Error(ErrorKind::parse, "not a finite number: '" + c + "'", location(source, lineno));
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw Error(ErrorKind::parse, "empty file", source);
  return t;
}

Grid uniform_grid(const std::vector<double>& x, const std::string& source) {
  if (x.size() < 2) throw Error(ErrorKind::parse, "need at least two rows", source);
  const double h = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  if (!(h > 0.0)) throw Error(ErrorKind::grid_mismatch, "grid is not increasing", source);
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (std::abs((x[k] - x[k - 1]) - h) > 1e-9 * h) {
      throw Error(ErrorKind::grid_mismatch, "grid is not uniform",
                  source + " row " + std::to_string(k + 1));
    }
  }
  return Grid(x.front(), h, x.size());
}

std::string format_function(const SampledFunction& f) {
  std::string out = "x,re,im\n";
  for (std::size_t k = 0; k < f.size(); ++k) append_row(out, {f.grid().node(k), f[k].real(), f[k].imag()});
  return out;
}

SampledFunction parse_function(const std::string& text, const std::string& source) {
  const Table t = parse_table(text, source);
  const std::size_t cx = t.column("x");
  const std::size_t cr = t.column("re");
  const std::size_t ci = t.column("im");
  std::vector<double> x;
  std::vector<cplx> v;
  for (const auto& row : t.rows) {
    x.push_back(row[cx]);
    v.emplace_back(row[cr], row[ci]);
  }
  return SampledFunction(uniform_grid(x, source), std::move(v));
}

std::string format_field(const WaveField& field) {
  std::string out = "x,t,re_u1,im_u1,re_u2,im_u2\n";
  const double h = field.h();
  for (std::size_t j = 0; j <= field.nt(); ++j) {
    for (std::size_t i = 0; i <= field.nx(); ++i) {
      const cplx a = field.u1(i, j);
      const cplx b = field.u2(i, j);
      append_row(out, {static_cast<double>(i) * h, static_cast<double>(j) * h, a.real(), a.imag(),
                       b.real(), b.imag()});
    }
  }
  return out;
}

std::string format_accelerant(const Accelerant& acc) {
  std::string out = "x,re_s,im_s,re_omega,im_omega\n";
  const Grid& g = acc.omega_pos.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    append_row(out, {g.node(k), acc.s[k].real(), acc.s[k].imag(), acc.omega_pos[k].real(),
                     acc.omega_pos[k].imag()});
  }
  return out;
}

std::string format_potential(const DynamicalPotential& pot, const Grid& grid) {
  std::string out = "x,p,q,re_v,im_v\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = grid.node(k);
    const double p = pot.p(x);
    const double q = pot.q(x);
    append_row(out, {x, p, q, -p, q});
  }
  return out;
}

DynamicalPotential parse_potential(const std::string& text, const std::string& source) {
  const Table t = parse_table(text, source);
  const std::size_t cx = t.column("x");
  const std::size_t cp = t.column("p");
  const std::size_t cq = t.column("q");
  std::vector<double> x;
  std::vector<cplx> p;
  std::vector<cplx> q;
  for (const auto& row : t.rows) {
    x.push_back(row[cx]);
    p.emplace_back(row[cp], 0.0);
    q.emplace_back(row[cq], 0.0);
  }
  const Grid g = uniform_grid(x, source);
  DynamicalPotential pot{RealProfile(SampledFunction(g, std::move(p))),
                         RealProfile(SampledFunction(g, std::move(q))), std::nullopt};
  return pot.with_estimated_bound(g);
}

std::string format_weyl(const std::vector<WeylValue>& values) {
  std::string out = "re_z,im_z,re_phi,im_phi,re_phiH,im_phiH,defect\n";
  for (const auto& w : values) {
    append_row(out, {w.z.real(), w.z.imag(), w.phi.real(), w.phi.imag(), w.phi_H.real(),
                     w.phi_H.imag(), w.defect});
  }
  return out;
}

}  // namespace dirac::csv
