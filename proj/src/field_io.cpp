#include "hypoinv/field_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hypoinv/config.hpp"
#include "hypoinv/error.hpp"

namespace hypoinv {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

template <typename T>
T parse_number(const std::string& cell, int line) {
  T v{};
  const auto* end = cell.data() + cell.size();
  const auto res = std::from_chars(cell.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw Error(ErrorCode::io, "line " + std::to_string(line) + ": cannot parse '" + cell + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string field_to_csv(const SpectralField& f) {
  const FrequencyLattice& lat = *f.lattice();
  std::string out;
  for (int a = 0; a < lat.dim(); ++a) out += "l" + std::to_string(a) + ",";
  out += "re,im\n";
  for (std::size_t k = 0; k < f.size(); ++k) {
    const FreqVec& l = lat.frequency(k);
    for (int a = 0; a < lat.dim(); ++a) out += std::to_string(l[static_cast<std::size_t>(a)]) + ",";
    out += format_double(f[k].real()) + "," + format_double(f[k].imag()) + "\n";
  }
  return out;
}

SpectralField field_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::io, "empty field file");
  const auto header = split(trim(line));
  const int dim = static_cast<int>(header.size()) - 2;
  bool ok = dim >= 1 && dim <= 3 && header[header.size() - 2] == "re" && header.back() == "im";
  for (int a = 0; ok && a < dim; ++a) ok = header[static_cast<std::size_t>(a)] == "l" + std::to_string(a);
  if (!ok) throw Error(ErrorCode::io, "line 1: expected header l0[,l1[,l2]],re,im");

  struct Row {
    FreqVec l{0, 0, 0};
    Complex c;
  };
  std::vector<Row> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::io, "line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " columns");
    Row r;
    for (int a = 0; a < dim; ++a) r.l[static_cast<std::size_t>(a)] = parse_number<int>(cells[static_cast<std::size_t>(a)], lineno);
    r.c = {parse_number<double>(cells[cells.size() - 2], lineno), parse_number<double>(cells.back(), lineno)};
    rows.push_back(r);
  }
  const int n = static_cast<int>(std::lround(std::pow(double(rows.size()), 1.0 / dim)));
  std::size_t expect = 1;
  for (int a = 0; a < dim; ++a) expect *= static_cast<std::size_t>(n);
  if (expect != rows.size() || n < 4 || n % 2 != 0)
    throw Error(ErrorCode::io, std::to_string(rows.size()) + " rows do not form an even n^" + std::to_string(dim) + " lattice");

  const LatticePtr lattice = build_lattice(dim, n);
  std::vector<Complex> coeffs(lattice->size());
  std::vector<unsigned char> seen(lattice->size(), 0);
  for (const auto& r : rows) {
    for (int a = 0; a < dim; ++a) {
      const int v = r.l[static_cast<std::size_t>(a)];
      if (v < -n / 2 || v >= n / 2) throw Error(ErrorCode::io, "frequency outside the lattice");
    }
    const std::size_t k = lattice->index_of(r.l);
    if (seen[k]) throw Error(ErrorCode::io, "duplicate frequency in field file");
    seen[k] = 1;
    coeffs[k] = r.c;
  }
  return SpectralField(lattice, std::move(coeffs));
}

void write_field_csv(const std::string& path, const SpectralField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
  out << field_to_csv(f);
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

SpectralField read_field_csv(const std::string& path) { return field_from_csv(read_text_file(path)); }

}  // namespace hypoinv
