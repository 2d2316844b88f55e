#include "cmrf/gen.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "cmrf/errors.hpp"
#include "cmrf/rng.hpp"

namespace cmrf {

namespace {

constexpr std::uint64_t kThetaTag = 0x7468;  // "th"
constexpr std::uint64_t kWeightTag = 0x7765; // "we"
constexpr std::uint64_t kTopoTag = 0x746f;   // "to"

using PairList = std::vector<std::pair<int, int>>;

PairList grid_edges(int rows, int cols, bool toroidal) {
  std::set<std::pair<int, int>> edges;
  auto id = [cols](int r, int c) { return r * cols + c; };
  auto add = [&](int a, int b) {
    if (a == b) return;
    edges.insert({std::min(a, b), std::max(a, b)});
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) add(id(r, c), id(r, c + 1));
      else if (toroidal && cols > 2) add(id(r, c), id(r, 0));
      if (r + 1 < rows) add(id(r, c), id(r + 1, c));
      else if (toroidal && rows > 2) add(id(r, c), id(0, c));
    }
  return PairList(edges.begin(), edges.end());
}

PairList erdos_edges(int n, double p, std::uint64_t seed) {
  PairList edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      SplitMix64 g(stream_key(seed, kTopoTag, i, j));
      if (g.next_double() < p) edges.push_back({i, j});
    }
  return edges;
}

bool connected(int n, const PairList& edges) {
  if (n == 0) return true;
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
  }
  return count == n;
}

// Configuration-model pairing, rejecting loops, multi-edges, and
// disconnected outcomes.
PairList regular_edges(int n, int d, std::uint64_t seed) {
  if ((static_cast<long>(n) * d) % 2 != 0)
    throw InputError("regular family requires n*d even");
  if (d >= n) throw InputError("regular family requires degree < n");
  const int budget = 10000;
  for (int attempt = 0; attempt < budget; ++attempt) {
    SplitMix64 g(stream_key(seed, kTopoTag, static_cast<std::uint64_t>(attempt)));
    std::vector<int> stubs(static_cast<std::size_t>(n) * d);
    for (std::size_t k = 0; k < stubs.size(); ++k) stubs[k] = static_cast<int>(k) / d;
    for (std::size_t k = stubs.size(); k > 1; --k)
      std::swap(stubs[k - 1], stubs[g.next_below(k)]);
    std::set<std::pair<int, int>> edges;
    bool ok = true;
    for (std::size_t k = 0; k + 1 < stubs.size() && ok; k += 2) {
      int a = stubs[k], b = stubs[k + 1];
      if (a == b) ok = false;
      else ok = edges.insert({std::min(a, b), std::max(a, b)}).second;
    }
    if (!ok) continue;
    PairList out(edges.begin(), edges.end());
    if (connected(n, out)) return out;
  }
  throw RetryError("regular graph rejection budget exceeded; advance the seed");
}

}  // namespace

GenSpec parse_family(const std::string& name) {
  GenSpec spec;
  std::string t;
  for (char c : name) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "grid") spec.family = GenSpec::Family::Grid;
  else if (t == "erdos") spec.family = GenSpec::Family::Erdos;
  else if (t == "regular") spec.family = GenSpec::Family::Regular;
  else if (t == "complete") spec.family = GenSpec::Family::Complete;
  else if (t == "cycle") spec.family = GenSpec::Family::SymmetricCycle;
  else throw InputError("unknown model family: " + name);
  return spec;
}

PairwiseModel generate(const GenSpec& spec) {
  if (spec.theta_lo > spec.theta_hi || spec.w_lo > spec.w_hi)
    throw InputError("generate: parameter ranges must be ordered");

  int n = spec.var_count();
  PairList pairs;
  bool symmetric = false;
  switch (spec.family) {
    case GenSpec::Family::Grid:
      if (spec.rows < 1 || spec.cols < 1) throw InputError("generate: bad grid shape");
      pairs = grid_edges(spec.rows, spec.cols, spec.toroidal);
      break;
    case GenSpec::Family::Erdos: {
      double p = spec.erdos_p >= 0.0 ? spec.erdos_p : 4.0 / std::max(n - 1, 1);
      if (p > 1.0) throw InputError("generate: erdos p must lie in [0,1]");
      pairs = erdos_edges(n, p, spec.seed);
      break;
    }
    case GenSpec::Family::Regular:
      pairs = regular_edges(n, spec.degree, spec.seed);
      break;
    case GenSpec::Family::Complete:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
      break;
    case GenSpec::Family::SymmetricCycle:
      if (n < 3) throw InputError("generate: cycle needs n >= 3");
      symmetric = true;
      for (int i = 0; i < n; ++i) pairs.push_back({std::min(i, (i + 1) % n), std::max(i, (i + 1) % n)});
      std::sort(pairs.begin(), pairs.end());
      break;
    case GenSpec::Family::SymmetricComplete:
      symmetric = true;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
      break;
  }

  std::vector<double> theta(n, 0.0);
  std::vector<std::pair<std::pair<int, int>, double>> edges;
  edges.reserve(pairs.size());
  if (symmetric) {
    for (auto [i, j] : pairs) edges.push_back({{i, j}, spec.symmetric_w});
  } else {
    for (int i = 0; i < n; ++i)
      theta[i] = SplitMix64(stream_key(spec.seed, kThetaTag, i)).uniform(spec.theta_lo, spec.theta_hi);
    for (auto [i, j] : pairs)
      edges.push_back(
          {{i, j}, SplitMix64(stream_key(spec.seed, kWeightTag, i, j)).uniform(spec.w_lo, spec.w_hi)});
  }
  return PairwiseModel::from_binary(theta, edges);
}

std::string describe(const GenSpec& spec) {
  char buf[256];
  const char* family = "?";
  switch (spec.family) {
    case GenSpec::Family::Grid: family = "grid"; break;
    case GenSpec::Family::Erdos: family = "erdos"; break;
    case GenSpec::Family::Regular: family = "regular"; break;
    case GenSpec::Family::Complete: family = "complete"; break;
    case GenSpec::Family::SymmetricCycle: family = "cycle"; break;
    case GenSpec::Family::SymmetricComplete: family = "symmetric-complete"; break;
  }
  if (spec.family == GenSpec::Family::Grid)
    std::snprintf(buf, sizeof buf, "grid %dx%d%s theta[%g,%g] w[%g,%g] seed=%llu", spec.rows,
                  spec.cols, spec.toroidal ? " toroidal" : "", spec.theta_lo, spec.theta_hi,
                  spec.w_lo, spec.w_hi, static_cast<unsigned long long>(spec.seed));
  else if (spec.family == GenSpec::Family::SymmetricCycle ||
           spec.family == GenSpec::Family::SymmetricComplete)
    std::snprintf(buf, sizeof buf, "%s n=%d w=%g seed=%llu", family, spec.n, spec.symmetric_w,
                  static_cast<unsigned long long>(spec.seed));
  else if (spec.family == GenSpec::Family::Regular)
    std::snprintf(buf, sizeof buf,
                  "regular n=%d d=%d (connected-only) theta[%g,%g] w[%g,%g] seed=%llu", spec.n,
                  spec.degree, spec.theta_lo, spec.theta_hi, spec.w_lo, spec.w_hi,
                  static_cast<unsigned long long>(spec.seed));
  else
    std::snprintf(buf, sizeof buf, "%s n=%d theta[%g,%g] w[%g,%g] seed=%llu", family, spec.n,
                  spec.theta_lo, spec.theta_hi, spec.w_lo, spec.w_hi,
                  static_cast<unsigned long long>(spec.seed));
  return buf;
}

}  // namespace cmrf
