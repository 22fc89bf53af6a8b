#include "reflest/tableio.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace reflest::tableio {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out.is_open()) throw IoError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in.is_open()) throw IoError("cannot open for reading: " + path);
  return in;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out.good()) throw IoError("write failed: " + path);
}

double parse_real(const std::string& text, const std::string& path, int line) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || static_cast<std::size_t>(end - begin) != text.size()) {
    throw IoError(path + " line " + std::to_string(line) + ": not a number: '" +
                  text + "'");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string chomp(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  return line;
}

void put_u64(std::ofstream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

void put_f64(std::ofstream& out, double d) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &d, sizeof bits);
  put_u64(out, bits);
}

std::uint64_t take_u64(std::ifstream& in, const std::string& path) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8))
    throw IoError("truncated binary table: " + path);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

double take_f64(std::ifstream& in, const std::string& path) {
  const std::uint64_t bits = take_u64(in, path);
  double d = 0.0;
  std::memcpy(&d, &bits, sizeof d);
  return d;
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field_csv(const ScalarField& field, const std::string& path) {
  auto out = open_out(path, std::ios::out);
  out << "t,x,value\n";
  for (Eigen::Index n = 0; n < field.nts(); ++n) {
    const std::string t = format_real(field.ts[n]);
    for (Eigen::Index i = 0; i < field.nxs(); ++i) {
      out << t << ',' << format_real(field.xs[i]) << ','
          << format_real(field.values(i, n)) << '\n';
    }
  }
  finish(out, path);
}

ScalarField read_field_csv(const std::string& path) {
  auto in = open_in(path, std::ios::in);
  std::string line;
  if (!std::getline(in, line) || chomp(line) != "t,x,value")
    throw IoError(path + ": expected header 't,x,value'");

  std::vector<double> ts, xs, vals;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = chomp(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3)
      throw IoError(path + " line " + std::to_string(lineno) + ": expected 3 fields");
    ts.push_back(parse_real(cells[0], path, lineno));
    xs.push_back(parse_real(cells[1], path, lineno));
    vals.push_back(parse_real(cells[2], path, lineno));
  }
  if (vals.empty()) throw IoError(path + ": no data rows");

  std::size_t block = 1;
  while (block < ts.size() && ts[block] == ts[0]) ++block;
  if (vals.size() % block != 0)
    throw IoError(path + ": ragged time blocks (" + std::to_string(vals.size()) +
                  " rows, block " + std::to_string(block) + ")");
  const auto nxs = static_cast<Eigen::Index>(block);
  const auto nts = static_cast<Eigen::Index>(vals.size() / block);

  ScalarField field;
  field.xs.resize(nxs);
  field.ts.resize(nts);
  field.values.resize(nxs, nts);
  for (Eigen::Index i = 0; i < nxs; ++i) field.xs[i] = xs[static_cast<std::size_t>(i)];
  for (Eigen::Index n = 0; n < nts; ++n) {
    const std::size_t base = static_cast<std::size_t>(n) * block;
    field.ts[n] = ts[base];
    for (Eigen::Index i = 0; i < nxs; ++i)
      field.values(i, n) = vals[base + static_cast<std::size_t>(i)];
  }
  return field;
}

void write_field_bin(const ScalarField& field, const std::string& path) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  put_u64(out, static_cast<std::uint64_t>(field.nts()));
  put_u64(out, static_cast<std::uint64_t>(field.nxs()));
  for (Eigen::Index n = 0; n < field.nts(); ++n)
    for (Eigen::Index i = 0; i < field.nxs(); ++i) put_f64(out, field.values(i, n));
  finish(out, path);
}

Eigen::MatrixXd read_field_bin(const std::string& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  const std::uint64_t rows = take_u64(in, path);
  const std::uint64_t cols = take_u64(in, path);
  if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24))
    throw IoError(path + ": implausible dimensions in binary table header");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(cols), static_cast<Eigen::Index>(rows));
  for (std::uint64_t n = 0; n < rows; ++n)
    for (std::uint64_t i = 0; i < cols; ++i)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = take_f64(in, path);
  char extra = 0;
  if (in.read(&extra, 1)) throw IoError(path + ": trailing bytes after binary table");
  return values;
}

void write_trace_csv(const costcome::TraceResult& trace, const ScalarField& value,
                     const std::string& path) {
  if (trace.ts.size() != value.nts())
    throw IoError("trace and value field disagree on time levels: " + path);
  auto out = open_out(path, std::ios::out);
  out << "t,xhat,value,multiplicity\n";
  for (Eigen::Index n = 0; n < trace.ts.size(); ++n) {
    const int multiplicity = trace.tie[static_cast<std::size_t>(n)] ? 2 : 1;
    out << format_real(trace.ts[n]) << ',' << format_real(trace.xhat[n]) << ','
        << format_real(value.interp_x(trace.xhat[n], n)) << ',' << multiplicity
        << '\n';
  }
  finish(out, path);
}

void write_ensemble_csv(const filtering::EnsembleSummary& ensemble,
                        const std::string& path) {
  auto out = open_out(path, std::ios::out);
  out << "t,mean,var,ess\n";
  for (Eigen::Index n = 0; n < ensemble.ts.size(); ++n) {
    out << format_real(ensemble.ts[n]) << ',' << format_real(ensemble.mean[n]) << ','
        << format_real(ensemble.var[n]) << ',' << format_real(ensemble.ess[n]) << '\n';
  }
  finish(out, path);
}

void write_boundary_csv(const control::BoundaryTable& table, const std::string& path) {
  auto out = open_out(path, std::ios::out);
  out << "x,t,V_constrained,W,V_penalized,gap\n";
  for (const auto& row : table.rows) {
    out << format_real(row.x) << ',' << format_real(row.t) << ','
        << format_real(row.v_constrained) << ',' << format_real(row.w_value) << ','
        << format_real(row.v_penalized) << ',' << format_real(row.gap) << '\n';
  }
  finish(out, path);
}

void write_path_csv(const skorokhod::SkorokhodSolution& sol, const std::string& path) {
  auto out = open_out(path, std::ios::out);
  out << "t,x,delta,unconstrained\n";
  const bool have_forcing = sol.unconstrained.size() == sol.ts.size();
  for (Eigen::Index n = 0; n < sol.ts.size(); ++n) {
    out << format_real(sol.ts[n]) << ',' << format_real(sol.x[n]) << ','
        << format_real(sol.delta[n]) << ',';
    if (have_forcing) out << format_real(sol.unconstrained[n]);
    out << '\n';
  }
  finish(out, path);
}

}  // namespace reflest::tableio
