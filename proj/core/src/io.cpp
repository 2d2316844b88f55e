#include "cmrf/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "cmrf/errors.hpp"

namespace cmrf {

namespace {

double read_number(std::istream& in, const char* what) {
  double v;
  if (!(in >> v)) throw InputError(std::string("model file: expected ") + what);
  return v;
}

int read_int(std::istream& in, const char* what) {
  int v;
  if (!(in >> v)) throw InputError(std::string("model file: expected ") + what);
  return v;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Accumulates factor tables onto a model under construction, merging
// duplicate scopes additively (log scale).
struct Builder {
  explicit Builder(std::vector<int> labels) : model(std::move(labels)) {}

  void add_singleton(int i, const std::vector<double>& logt) {
    for (int x = 0; x < model.label_count(i); ++x) model.add_to_theta(i, x, logt[x]);
  }

  void add_pair(int i, int j, const std::vector<double>& logt) {
    // logt is row-major in the (i,j) orientation given.
    int e = model.edge_index(i, j);
    if (e < 0) {
      model.add_edge(i, j, logt);
      return;
    }
    const Edge& ed = model.edges()[e];
    auto& table = model.mutable_edge_table(e);
    int Li = model.label_count(ed.i), Lj = model.label_count(ed.j);
    for (int a = 0; a < Li; ++a)
      for (int b = 0; b < Lj; ++b)
        table[a * Lj + b] += ed.i == i ? logt[a * Lj + b] : logt[b * Li + a];
  }

  PairwiseModel model;
};

}  // namespace

PairwiseModel read_uai(std::istream& in) {
  std::string preamble;
  if (!(in >> preamble)) throw InputError("uai: empty file");
  if (preamble != "MARKOV") throw InputError("uai: expected MARKOV preamble, got " + preamble);
  int n = read_int(in, "variable count");
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = read_int(in, "cardinality");
  int nf = read_int(in, "factor count");

  std::vector<std::vector<int>> scopes(nf);
  for (int f = 0; f < nf; ++f) {
    int arity = read_int(in, "factor arity");
    if (arity < 1 || arity > 2)
      throw InputError("uai: only singleton and pairwise factors supported");
    scopes[f].resize(arity);
    for (int k = 0; k < arity; ++k) {
      scopes[f][k] = read_int(in, "scope variable");
      if (scopes[f][k] < 0 || scopes[f][k] >= n) throw InputError("uai: scope variable out of range");
    }
    if (arity == 2 && scopes[f][0] == scopes[f][1])
      throw InputError("uai: self-loop factor scope");
  }

  Builder b(labels);
  for (int f = 0; f < nf; ++f) {
    int expect = labels[scopes[f][0]] * (scopes[f].size() == 2 ? labels[scopes[f][1]] : 1);
    int count = read_int(in, "table size");
    if (count != expect) throw InputError("uai: table size mismatch");
    std::vector<double> logt(count);
    for (int k = 0; k < count; ++k) {
      double v = read_number(in, "table entry");
      if (!(v > 0.0) || !std::isfinite(v))
        throw InputError("uai: table entries must be strictly positive and finite");
      logt[k] = std::log(v);
    }
    if (scopes[f].size() == 1)
      b.add_singleton(scopes[f][0], logt);
    else
      b.add_pair(scopes[f][0], scopes[f][1], logt);
  }
  return std::move(b.model);
}

void write_uai(std::ostream& out, const PairwiseModel& m) {
  out << "MARKOV\n" << m.num_vars() << "\n";
  for (int i = 0; i < m.num_vars(); ++i) out << (i ? " " : "") << m.label_count(i);
  out << "\n" << m.num_vars() + m.num_edges() << "\n";
  for (int i = 0; i < m.num_vars(); ++i) out << "1 " << i << "\n";
  for (const Edge& e : m.edges()) out << "2 " << e.i << " " << e.j << "\n";
  out << "\n";
  for (int i = 0; i < m.num_vars(); ++i) {
    out << m.label_count(i) << "\n";
    for (int x = 0; x < m.label_count(i); ++x)
      out << (x ? " " : "") << fmt(std::exp(m.theta(i, x)));
    out << "\n";
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    auto t = m.edge_table(e);
    out << t.size() << "\n";
    for (std::size_t k = 0; k < t.size(); ++k)
      out << (k ? " " : "") << fmt(std::exp(t[k]));
    out << "\n";
  }
}

PairwiseModel read_native(std::istream& in) {
  int n = read_int(in, "variable count");
  int nf = read_int(in, "factor count");
  std::vector<int> labels(n, 2);
  for (int k = 0; k < n; ++k) {
    int i = read_int(in, "variable index");
    if (i < 0 || i >= n) throw InputError("native: variable index out of range");
    labels[i] = read_int(in, "label count");
  }
  Builder b(labels);
  // Scope lines hold one or two indices; disambiguate by token count per line.
  std::string line;
  std::getline(in, line);  // finish the current line
  int seen = 0;
  while (seen < nf) {
    if (!std::getline(in, line)) throw InputError("native: truncated factor block");
    std::istringstream scope(line);
    std::vector<int> vars;
    int v;
    while (scope >> v) vars.push_back(v);
    if (vars.empty()) continue;  // tolerate blank separator lines
    if (vars.size() > 2) throw InputError("native: scope must have 1 or 2 variables");
    for (int x : vars)
      if (x < 0 || x >= n) throw InputError("native: scope variable out of range");
    int count = labels[vars[0]] * (vars.size() == 2 ? labels[vars[1]] : 1);
    std::vector<double> logt(count);
    for (int k = 0; k < count; ++k) {
      logt[k] = read_number(in, "log-table entry");
      if (!std::isfinite(logt[k])) throw InputError("native: non-finite log-table entry");
    }
    std::getline(in, line);
    if (vars.size() == 1)
      b.add_singleton(vars[0], logt);
    else if (vars[0] == vars[1])
      throw InputError("native: self-loop factor scope");
    else
      b.add_pair(vars[0], vars[1], logt);
    ++seen;
  }
  return std::move(b.model);
}

void write_native(std::ostream& out, const PairwiseModel& m) {
  out << m.num_vars() << " " << m.num_vars() + m.num_edges() << "\n";
  for (int i = 0; i < m.num_vars(); ++i) out << i << " " << m.label_count(i) << "\n";
  for (int i = 0; i < m.num_vars(); ++i) {
    out << i << "\n";
    for (int x = 0; x < m.label_count(i); ++x) out << (x ? " " : "") << fmt(m.theta(i, x));
    out << "\n";
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    out << m.edges()[e].i << " " << m.edges()[e].j << "\n";
    auto t = m.edge_table(e);
    for (std::size_t k = 0; k < t.size(); ++k) out << (k ? " " : "") << fmt(t[k]);
    out << "\n";
  }
}

namespace {
bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}
}  // namespace

PairwiseModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file: " + path);
  return has_suffix(path, ".uai") ? read_uai(in) : read_native(in);
}

void save_model(const std::string& path, const PairwiseModel& m) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write model file: " + path);
  if (has_suffix(path, ".uai"))
    write_uai(out, m);
  else
    write_native(out, m);
}

}  // namespace cmrf
