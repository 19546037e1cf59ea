#pragma once

// Two ways to solve an instance:
//
//   - solveEnumerate: exact enumeration over the unfixed variables of a
//     pure-binary instance (Gray-code walk with incremental row activities),
//     refusing anything above maxEnumVars. Returns the certified optimum and
//     optionally the best-m solution pool. This is the desk-scale oracle.
//
//   - solveExternal: drives any LP-file solver through a command template
//     with {lp}, {sol} and {timelimit} placeholders, then parses and
//     validates the solution file. Two solution dialects are supported:
//
//       plain:      '#' comments, optional "status <word>" and
//                   "objective <num>" lines, then "x<i> <value>" lines.
//                   Missing variables default to their finite lower bound
//                   (0 for free variables).
//       xml-lite:   <solution status="..." objective="...">
//                     <var name="x0" value="1"/> ... </solution>
//
// Every incumbent from either path is re-validated with checkFeasibility
// before being returned. Temp files live in a per-invocation directory under
// the configured scratch root (or $APOLLO_SCRATCH, or the system temp dir);
// the directory is removed on success and kept for inspection on errors.

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "apollo/errors.hpp"
#include "apollo/lp_format.hpp"
#include "apollo/milp.hpp"
#include "apollo/solution_pool.hpp"

namespace apollo {

enum class BackendKind { Enumerate, External };
enum class SolutionDialect { Plain, XmlLite };

enum class SolveStatus { Optimal, Feasible, Infeasible, TimeoutNoIncumbent };

inline const char* toString(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimeoutNoIncumbent: return "timeout-no-incumbent";
  }
  return "?";
}

struct BackendConfig {
  BackendKind kind = BackendKind::Enumerate;
  std::string commandTemplate;  // e.g. "mysolver {lp} --timelimit {timelimit} --sol {sol}"
  double timeLimitSec = 60.0;
  SolutionDialect dialect = SolutionDialect::Plain;
  std::string scratchDir;  // empty: $APOLLO_SCRATCH, else system temp
  int maxEnumVars = 24;
  double feasTol = kDefaultFeasTol;
  int poolSize = 0;  // enumerator: also return the best-m pool
  /// Enumerator node budget. 0 solves exhaustively (certified optimum). A
  /// positive value visits only that many assignments of the fixed search
  /// order and returns the best incumbent found, the deterministic stand-in
  /// for a time-limited solver.
  std::uint64_t nodeBudget = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::TimeoutNoIncumbent;
  std::optional<Assignment> incumbent;
  std::optional<double> objective;
  double solveSeconds = 0.0;
  std::optional<SolutionPool> pool;

  bool hasIncumbent() const { return incumbent.has_value(); }
};

// ---------------------------------------------------------------------------
// exact enumeration
// ---------------------------------------------------------------------------

inline SolveResult solveEnumerate(const MilpInstance& inst, const BackendConfig& cfg = {}) {
  auto tStart = std::chrono::steady_clock::now();
  if (!inst.pureBinary())
    throw RefusalError("enumerate: instance '" + inst.name + "' is not pure binary");
  std::vector<int> freeIdx = inst.freeBinaryIndices();
  const int K = static_cast<int>(freeIdx.size());
  if (K > cfg.maxEnumVars)
    throw RefusalError("enumerate: " + std::to_string(K) + " unfixed variables exceed the limit of " +
                       std::to_string(cfg.maxEnumVars));

  const int m = inst.numRows();
  // column -> incident rows, restricted to the free variables
  std::vector<std::vector<std::pair<int, double>>> freeCols(static_cast<std::size_t>(K));
  std::vector<int> slotOf(static_cast<std::size_t>(inst.numVars), -1);
  for (int t = 0; t < K; ++t) slotOf[freeIdx[t]] = t;
  std::vector<double> activity(static_cast<std::size_t>(m), 0.0);
  for (const Triplet& t : inst.triplets) {
    if (slotOf[t.col] >= 0)
      freeCols[slotOf[t.col]].emplace_back(t.row, t.value);
    else
      activity[t.row] += t.value * inst.lower[t.col];  // fixed contribution
  }
  double baseObj = 0.0;
  for (int j = 0; j < inst.numVars; ++j)
    if (slotOf[j] < 0) baseObj += inst.objective[j] * inst.lower[j];

  const double tol = cfg.feasTol;
  auto rowViolated = [&](int r) {
    switch (inst.senses[r]) {
      case RowSense::LessEqual: return activity[r] > inst.rhs[r] + tol;
      case RowSense::GreaterEqual: return activity[r] < inst.rhs[r] - tol;
      case RowSense::Equal: return std::fabs(activity[r] - inst.rhs[r]) > tol;
    }
    return false;
  };
  std::vector<char> violated(static_cast<std::size_t>(m), 0);
  long long violCount = 0;
  for (int r = 0; r < m; ++r)
    if ((violated[r] = rowViolated(r) ? 1 : 0)) ++violCount;

  double obj = baseObj;  // all free variables start at 0
  std::uint64_t bits = 0;

  // best-m candidates ordered by (objective, bits); worst on top
  struct Cand {
    double obj;
    std::uint64_t bits;
    bool operator<(const Cand& o) const {
      return obj != o.obj ? obj < o.obj : bits < o.bits;
    }
  };
  std::priority_queue<Cand> pool;  // max-heap: top is the worst kept candidate
  const int poolCap = std::max(cfg.poolSize, 1);
  bool foundAny = false;
  Cand best{0.0, 0};
  auto consider = [&]() {
    Cand c{obj, bits};
    if (!foundAny || c < best) best = c;
    foundAny = true;
    if (static_cast<int>(pool.size()) < poolCap) {
      pool.push(c);
    } else if (c < pool.top()) {
      pool.pop();
      pool.push(c);
    }
  };

  if (violCount == 0) consider();
  const std::uint64_t full = K < 64 ? (1ULL << K) : 0;
  const std::uint64_t total =
      cfg.nodeBudget > 0 ? std::min(full, cfg.nodeBudget) : full;
  for (std::uint64_t i = 1; i < total; ++i) {
    int t = __builtin_ctzll(i);
    double delta = (bits >> t) & 1ULL ? -1.0 : 1.0;
    bits ^= 1ULL << t;
    obj += delta * inst.objective[freeIdx[t]];
    for (const auto& [r, coef] : freeCols[t]) {
      activity[r] += delta * coef;
      char nowViolated = rowViolated(r) ? 1 : 0;
      violCount += nowViolated - violated[r];
      violated[r] = nowViolated;
    }
    if (violCount == 0) consider();
  }

  SolveResult res;
  auto reconstruct = [&](std::uint64_t b) {
    Assignment a;
    a.values.resize(static_cast<std::size_t>(inst.numVars));
    for (int j = 0; j < inst.numVars; ++j)
      a.values[j] = slotOf[j] >= 0 ? static_cast<double>((b >> slotOf[j]) & 1ULL)
                                   : inst.lower[j];
    return a;
  };
  const bool exhaustive = total == full;
  if (!foundAny) {
    res.status = exhaustive ? SolveStatus::Infeasible : SolveStatus::TimeoutNoIncumbent;
  } else {
    res.status = exhaustive ? SolveStatus::Optimal : SolveStatus::Feasible;
    Assignment a = reconstruct(best.bits);
    if (!checkFeasibility(inst, a, tol).feasible)
      throw IntegrityError("enumerate: incumbent failed fresh validation");
    res.objective = evaluateObjective(inst, a);
    res.incumbent = std::move(a);
    if (cfg.poolSize > 0) {
      std::vector<Cand> kept;
      while (!pool.empty()) {
        kept.push_back(pool.top());
        pool.pop();
      }
      SolutionPool sp;
      sp.capacity = cfg.poolSize;
      for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
        Assignment a2 = reconstruct(it->bits);
        if (!checkFeasibility(inst, a2, tol).feasible)
          throw IntegrityError("enumerate: pool member failed fresh validation");
        double o2 = evaluateObjective(inst, a2);
        sp.entries.push_back({std::move(a2), o2});
      }
      res.pool = std::move(sp);
    }
  }
  res.solveSeconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - tStart).count();
  return res;
}

// ---------------------------------------------------------------------------
// scratch directories
// ---------------------------------------------------------------------------

inline std::filesystem::path scratchRoot(const BackendConfig& cfg) {
  if (!cfg.scratchDir.empty()) return cfg.scratchDir;
  if (const char* env = std::getenv("APOLLO_SCRATCH"); env && *env) return env;
  return std::filesystem::temp_directory_path();
}

/// Unique per-invocation directory; removed on success, kept on error so the
/// raw solver output stays inspectable.
class ScratchDir {
public:
  explicit ScratchDir(const BackendConfig& cfg) {
    static std::atomic<std::uint64_t> counter{0};
    std::filesystem::path root = scratchRoot(cfg);
    std::filesystem::create_directories(root);
    path_ = root / ("apollo-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    if (!keep_) {
      std::error_code ec;
      std::filesystem::remove_all(path_, ec);
    }
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  void keep() { keep_ = true; }

private:
  std::filesystem::path path_;
  bool keep_ = false;
};

// ---------------------------------------------------------------------------
// solution-file dialects
// ---------------------------------------------------------------------------

struct ParsedSolution {
  std::optional<std::string> status;
  std::optional<double> objective;
  std::vector<std::pair<int, double>> values;  // (var index, value)
};

inline ParsedSolution parsePlainSolution(const std::string& text) {
  ParsedSolution sol;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "status") {
      std::string s;
      if (!(ls >> s)) throw ParseError("solution: status line without value", lineNo, 1);
      sol.status = s;
    } else if (key == "objective") {
      double v;
      if (!(ls >> v)) throw ParseError("solution: objective line without value", lineNo, 1);
      sol.objective = v;
    } else if (key.size() > 1 && key[0] == 'x') {
      char* end = nullptr;
      long idx = std::strtol(key.c_str() + 1, &end, 10);
      if (*end != '\0') throw ParseError("solution: bad variable name '" + key + "'", lineNo, 1);
      double v;
      if (!(ls >> v))
        throw ParseError("solution: missing value for '" + key + "'", lineNo, 1);
      sol.values.emplace_back(static_cast<int>(idx), v);
    } else {
      throw ParseError("solution: unrecognized line '" + line + "'", lineNo, 1);
    }
  }
  return sol;
}

inline ParsedSolution parseXmlLiteSolution(const std::string& text) {
  ParsedSolution sol;
  auto attr = [](const std::string& hay, std::size_t from, const std::string& name)
      -> std::optional<std::string> {
    std::string needle = name + "=\"";
    std::size_t a = hay.find(needle, from);
    if (a == std::string::npos) return std::nullopt;
    std::size_t b = hay.find('"', a + needle.size());
    if (b == std::string::npos) return std::nullopt;
    return hay.substr(a + needle.size(), b - a - needle.size());
  };
  std::size_t open = text.find("<solution");
  if (open == std::string::npos) throw ParseError("solution: missing <solution> tag", 1, 1);
  std::size_t openEnd = text.find('>', open);
  if (openEnd == std::string::npos) throw ParseError("solution: unterminated tag", 1, 1);
  std::string head = text.substr(open, openEnd - open);
  if (auto s = attr(head, 0, "status")) sol.status = *s;
  if (auto o = attr(head, 0, "objective")) sol.objective = std::strtod(o->c_str(), nullptr);
  std::size_t pos = openEnd;
  for (;;) {
    std::size_t v = text.find("<var", pos);
    if (v == std::string::npos) break;
    std::size_t vEnd = text.find('>', v);
    if (vEnd == std::string::npos) throw ParseError("solution: unterminated <var> tag", 1, 1);
    std::string tag = text.substr(v, vEnd - v);
    auto name = attr(tag, 0, "name");
    auto value = attr(tag, 0, "value");
    if (!name || !value || name->size() < 2 || (*name)[0] != 'x')
      throw ParseError("solution: <var> needs name=\"x<i>\" and value", 1, 1);
    sol.values.emplace_back(std::atoi(name->c_str() + 1), std::strtod(value->c_str(), nullptr));
    pos = vEnd;
  }
  return sol;
}

// ---------------------------------------------------------------------------
// external subprocess backend
// ---------------------------------------------------------------------------

namespace detail {

inline std::string substitutePlaceholders(std::string tpl, const std::string& lp,
                                          const std::string& sol, double timelimit) {
  auto replaceAll = [](std::string& s, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  char tl[32];
  std::snprintf(tl, sizeof(tl), "%g", timelimit);
  replaceAll(tpl, "{lp}", lp);
  replaceAll(tpl, "{sol}", sol);
  replaceAll(tpl, "{timelimit}", tl);
  return tpl;
}

/// Runs `sh -c cmd` with stdout/stderr redirected to logPath; kills the child
/// after deadlineSec. Returns (exitedNormally, exitCode). The command runs in
/// a subshell so its own redirections stay intact.
inline std::pair<bool, int> runWithDeadline(const std::string& cmd, const std::string& logPath,
                                            double deadlineSec) {
  std::string full = "( " + cmd + " ) > " + logPath + " 2>&1";
  pid_t pid = ::fork();
  if (pid < 0) throw IntegrityError("backend: fork failed");
  if (pid == 0) {
    ::execl("/bin/sh", "sh", "-c", full.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  auto start = std::chrono::steady_clock::now();
  for (;;) {
    int status = 0;
    pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) {
      bool normal = WIFEXITED(status);
      return {normal, normal ? WEXITSTATUS(status) : -1};
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > deadlineSec) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return {false, -1};
    }
    ::usleep(10000);
  }
}

inline std::string readFileOrEmpty(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline SolveResult solveExternal(const MilpInstance& inst, const BackendConfig& cfg) {
  if (cfg.commandTemplate.empty())
    throw ConfigError("external backend: empty command template");
  auto tStart = std::chrono::steady_clock::now();
  ScratchDir scratch(cfg);
  std::filesystem::path lpPath = scratch.path() / "instance.lp";
  std::filesystem::path solPath = scratch.path() / "solution.sol";
  std::filesystem::path logPath = scratch.path() / "solver.log";
  {
    std::ofstream out(lpPath, std::ios::binary);
    out << writeLp(inst);
  }
  std::string cmd = detail::substitutePlaceholders(cfg.commandTemplate, lpPath.string(),
                                                   solPath.string(), cfg.timeLimitSec);
  // hard kill a little past the limit; the caller's grace policy sits on top
  double deadline = cfg.timeLimitSec * 1.1 + 1.0;
  auto [exitedNormally, exitCode] = detail::runWithDeadline(cmd, logPath.string(), deadline);

  SolveResult res;
  res.solveSeconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - tStart).count();

  if (!std::filesystem::exists(solPath)) {
    // killed, crashed or gave up without writing a solution
    res.status = SolveStatus::TimeoutNoIncumbent;
    (void)exitedNormally;
    (void)exitCode;
    return res;
  }

  std::string solText = detail::readFileOrEmpty(solPath);
  ParsedSolution parsed;
  try {
    parsed = cfg.dialect == SolutionDialect::Plain ? parsePlainSolution(solText)
                                                   : parseXmlLiteSolution(solText);
  } catch (const ParseError& e) {
    scratch.keep();
    throw ParseError(std::string(e.what()) + "; raw output kept in " + scratch.path().string(),
                     e.line(), e.column());
  }

  if (parsed.status && *parsed.status == "infeasible") {
    res.status = SolveStatus::Infeasible;
    return res;
  }
  if (parsed.values.empty() && !parsed.status) {
    scratch.keep();
    throw ParseError("solution file has neither assignments nor a status; raw output kept in " +
                         scratch.path().string(),
                     1, 1);
  }

  Assignment a;
  a.values.resize(static_cast<std::size_t>(inst.numVars));
  for (int j = 0; j < inst.numVars; ++j)
    a.values[j] = std::isfinite(inst.lower[j]) ? inst.lower[j] : 0.0;
  for (const auto& [idx, value] : parsed.values) {
    if (idx < 0 || idx >= inst.numVars) {
      scratch.keep();
      throw IntegrityError("external backend: solution names unknown variable x" +
                           std::to_string(idx) + "; kept " + scratch.path().string());
    }
    a.values[idx] = value;
  }
  if (!checkFeasibility(inst, a, cfg.feasTol).feasible) {
    scratch.keep();
    throw IntegrityError("external backend: incumbent fails feasibility at tol " +
                         std::to_string(cfg.feasTol) + "; kept " + scratch.path().string());
  }
  res.objective = evaluateObjective(inst, a);
  res.incumbent = std::move(a);
  res.status = (parsed.status && *parsed.status == "optimal") ? SolveStatus::Optimal
                                                              : SolveStatus::Feasible;
  return res;
}

inline SolveResult solve(const MilpInstance& inst, const BackendConfig& cfg) {
  return cfg.kind == BackendKind::Enumerate ? solveEnumerate(inst, cfg)
                                            : solveExternal(inst, cfg);
}

/// Up to m best distinct feasible solutions. The enumerator emits them in one
/// pass; an external solver is re-invoked with no-good cuts excluding each
/// incumbent, which walks down the ranked solutions of a pure-binary
/// instance.
inline SolutionPool collectPool(const MilpInstance& inst, const BackendConfig& cfg, int m) {
  if (m < 1) throw ConfigError("collectPool: m must be >= 1");
  if (cfg.kind == BackendKind::Enumerate) {
    BackendConfig c = cfg;
    c.poolSize = m;
    SolveResult res = solveEnumerate(inst, c);
    if (res.pool) return *res.pool;
    return SolutionPool{{}, m};
  }
  if (!inst.pureBinary())
    throw RefusalError("collectPool: no-good iteration needs a pure-binary instance");
  SolutionPool pool;
  pool.capacity = m;
  MilpInstance cur = inst;
  for (int k = 0; k < m; ++k) {
    SolveResult res = solveExternal(cur, cfg);
    if (!res.hasIncumbent()) break;
    const Assignment& x = *res.incumbent;
    pool.insert(x, evaluateObjective(inst, x));
    // no-good row: sum_{x_i=1} (1 - x_i) + sum_{x_i=0} x_i >= 1
    int row = cur.numRows();
    double ones = 0.0;
    for (int j = 0; j < inst.numVars; ++j) {
      if (std::round(x[j]) == 1.0) {
        cur.triplets.push_back({row, j, -1.0});
        ones += 1.0;
      } else {
        cur.triplets.push_back({row, j, 1.0});
      }
    }
    cur.senses.push_back(RowSense::GreaterEqual);
    cur.rhs.push_back(1.0 - ones);
  }
  return pool;
}

}  // namespace apollo
