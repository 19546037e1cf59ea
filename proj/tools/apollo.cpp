// Command-line front end: instance generation, pool collection, predictor
// training, prediction, single correction steps, full alternating
// prediction-correction runs, and batch experiments. Every subcommand accepts
// --config FILE with `key=value` lines mirroring its long options.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "apollo/backend.hpp"
#include "apollo/bipartite_graph.hpp"
#include "apollo/gnn.hpp"
#include "apollo/instance_gen.hpp"
#include "apollo/lp_format.hpp"
#include "apollo/milp.hpp"
#include "apollo/orchestrator.hpp"
#include "apollo/prediction.hpp"
#include "apollo/rng.hpp"
#include "apollo/solution_pool.hpp"
#include "apollo/training.hpp"
#include "apollo/trust_region.hpp"
#include "apollo/uebo.hpp"

namespace fs = std::filesystem;
using namespace apollo;

namespace {

std::string readFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

std::vector<fs::path> listFiles(const fs::path& dir, const std::string& extension) {
  if (!fs::exists(dir)) throw ConfigError("directory does not exist: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == extension)
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<MilpInstance> loadInstances(const fs::path& dir) {
  std::vector<MilpInstance> out;
  for (const fs::path& p : listFiles(dir, ".lp")) {
    MilpInstance inst = readLp(readFile(p));
    if (inst.name.empty()) inst.name = p.stem().string();
    out.push_back(std::move(inst));
  }
  return out;
}

// shared backend options
struct BackendFlags {
  std::string backend = "enumerate";
  std::string command;
  std::string dialect = "plain";
  double timelimit = 60.0;
  std::string scratch;
  int maxEnumVars = 24;
  double feasTol = kDefaultFeasTol;

  void attach(CLI::App* app) {
    app->add_option("--backend", backend, "Backend kind: enumerate | external")
        ->check(CLI::IsMember({"enumerate", "external"}));
    app->add_option("--backend-cmd", command,
                    "External command template with {lp} {sol} {timelimit} placeholders");
    app->add_option("--dialect", dialect, "Solution file dialect: plain | xml-lite")
        ->check(CLI::IsMember({"plain", "xml-lite"}));
    app->add_option("--timelimit", timelimit, "Per-solve time limit in seconds");
    app->add_option("--scratch", scratch, "Scratch directory (default: $APOLLO_SCRATCH)");
    app->add_option("--max-enum-vars", maxEnumVars, "Enumeration refusal threshold");
    app->add_option("--feas-tol", feasTol, "Feasibility tolerance");
  }

  BackendConfig build() const {
    BackendConfig cfg;
    cfg.kind = backend == "external" || !command.empty() ? BackendKind::External
                                                         : BackendKind::Enumerate;
    cfg.commandTemplate = command;
    cfg.dialect = dialect == "xml-lite" ? SolutionDialect::XmlLite : SolutionDialect::Plain;
    cfg.timeLimitSec = timelimit;
    cfg.scratchDir = scratch;
    cfg.maxEnumVars = maxEnumVars;
    cfg.feasTol = feasTol;
    if (cfg.kind == BackendKind::External && cfg.commandTemplate.empty())
      throw ConfigError("external backend selected but --backend-cmd is empty");
    return cfg;
  }
};

Schedule parseSchedule(const std::string& text) {
  Schedule s;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ';')) {
    if (part.empty()) continue;
    IterationPlan plan;
    if (std::sscanf(part.c_str(), "%d,%d,%d,%lf", &plan.k0, &plan.k1, &plan.delta,
                    &plan.timeBudgetSec) != 4)
      throw ConfigError("bad schedule entry '" + part + "', expected k0,k1,delta,budget");
    s.iterations.push_back(plan);
  }
  if (s.iterations.empty()) throw ConfigError("schedule '" + text + "' has no iterations");
  return s;
}

std::string marginalsCsv(const MilpInstance& inst, const MarginalPrediction& pred) {
  std::vector<int> binIdx = inst.binaryIndices();
  std::string out = "varName,prob\n";
  for (std::size_t k = 0; k < binIdx.size(); ++k)
    out += "x" + std::to_string(binIdx[k]) + "," + fmt17(pred.probs[k]) + "\n";
  return out;
}

MarginalPrediction readMarginalsCsv(const MilpInstance& inst, const std::string& text) {
  std::map<int, double> byVar;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line.rfind("varName", 0) == 0) continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos || line[0] != 'x')
      throw ParseError("marginals: expected x<i>,<prob>", lineNo, 1);
    byVar[std::atoi(line.c_str() + 1)] = std::strtod(line.c_str() + comma + 1, nullptr);
  }
  MarginalPrediction pred;
  for (int j : inst.binaryIndices()) {
    auto it = byVar.find(j);
    if (it == byVar.end())
      throw ConfigError("marginals: missing probability for x" + std::to_string(j));
    pred.probs.push_back(it->second);
  }
  return pred;
}

std::string solutionText(const MilpInstance& inst, const Assignment& a, SolveStatus status,
                         double objective) {
  std::string out = "# solution for " + inst.name + "\n";
  out += std::string("status ") + toString(status) + "\n";
  out += "objective " + fmt17(objective) + "\n";
  for (int j = 0; j < inst.numVars; ++j)
    out += "x" + std::to_string(j) + " " + fmt17(a.values[j]) + "\n";
  return out;
}

std::string ueboCsv(const std::vector<UeboEntry>& entries) {
  std::string out = "var,p,ref,H,d,uebo,consistent\n";
  for (const UeboEntry& e : entries)
    out += "x" + std::to_string(e.varIndex) + "," + fmt17(e.p) + "," +
           std::to_string(e.refValue) + "," + fmt17(e.entropy) + "," + fmt17(e.discrepancy) +
           "," + fmt17(e.uebo) + "," + (e.consistent ? "1" : "0") + "\n";
  return out;
}

// predictor options shared by solve/experiment
struct PredictorFlags {
  std::string modelPath;
  double oracleEps = -1.0;
  double oracleConf = 0.9;

  void attach(CLI::App* app) {
    app->add_option("--model", modelPath, "Trained predictor file (.apm)");
    app->add_option("--oracle-eps", oracleEps,
                    "Use the noisy oracle predictor with this error rate (needs an "
                    "enumerable instance)");
    app->add_option("--oracle-conf", oracleConf, "Oracle confidence toward the chosen value");
  }

  bool configured() const { return !modelPath.empty() || oracleEps >= 0.0; }

  std::function<Predictor(const MilpInstance&, std::uint64_t)> factory(
      const BackendConfig& backend) const {
    if (!modelPath.empty()) {
      GnnModel model = modelFromText(readFile(modelPath));
      return [model](const MilpInstance&, std::uint64_t) { return makeModelPredictor(model); };
    }
    if (oracleEps >= 0.0) {
      double eps = oracleEps, conf = oracleConf;
      BackendConfig enumCfg = backend;
      enumCfg.kind = BackendKind::Enumerate;
      enumCfg.poolSize = 0;
      return [eps, conf, enumCfg](const MilpInstance& inst, std::uint64_t seed) {
        SolveResult res = solveEnumerate(inst, enumCfg);
        if (!res.hasIncumbent())
          throw ConfigError("oracle predictor: instance '" + inst.name +
                            "' has no feasible solution to certify");
        return makeOraclePredictor(*res.incumbent, eps, conf, seed);
      };
    }
    throw ConfigError("no predictor configured: pass --model or --oracle-eps");
  }
};

int cmdGenerate(const std::string& family, int count, std::uint64_t seed, const fs::path& outDir,
                CaParams caBase, ScParams scBase) {
  nlohmann::json manifest;
  manifest["family"] = family;
  manifest["count"] = count;
  manifest["seed"] = seed;
  if (family == "ca") {
    manifest["params"] = {{"items", caBase.items},
                          {"bids", caBase.bids},
                          {"addItemProb", caBase.addItemProb},
                          {"maxSubItems", caBase.maxSubItems},
                          {"additivity", caBase.additivity},
                          {"valueDeviation", caBase.valueDeviation}};
  } else {
    manifest["params"] = {{"rows", scBase.rows},
                          {"cols", scBase.cols},
                          {"density", scBase.density},
                          {"maxCost", scBase.maxCost}};
  }
  nlohmann::json instances = nlohmann::json::array();
  for (int i = 0; i < count; ++i) {
    std::uint64_t instSeed = seed + static_cast<std::uint64_t>(i);
    MilpInstance inst;
    if (family == "ca") {
      CaParams p = caBase;
      p.seed = instSeed;
      inst = genCa(p);
    } else {
      ScParams p = scBase;
      p.seed = instSeed;
      inst = genSc(p);
    }
    fs::path file = outDir / (inst.name + ".lp");
    writeFile(file, writeLp(inst));
    InstanceStats stats = instanceStats(inst);
    instances.push_back({{"name", inst.name},
                         {"file", file.filename().string()},
                         {"seed", instSeed},
                         {"vars", stats.vars},
                         {"cons", stats.cons},
                         {"nonzeros", stats.nonzeros},
                         {"binaries", stats.binaries}});
  }
  manifest["instances"] = std::move(instances);
  writeFile(outDir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "generated " << count << " " << family << " instances in " << outDir.string()
            << "\n";
  return 0;
}

int cmdSolveLp(const fs::path& lpPath, const fs::path& solPath, double timelimit,
               const std::string& format, int maxEnumVars, int poolSize,
               const fs::path& poolOut) {
  MilpInstance inst = readLp(readFile(lpPath));
  BackendConfig cfg;
  cfg.maxEnumVars = maxEnumVars;
  cfg.timeLimitSec = timelimit;
  cfg.poolSize = poolSize;
  SolveResult res = solveEnumerate(inst, cfg);
  std::string out;
  if (format == "xml-lite") {
    out = "<solution status=\"" + std::string(toString(res.status)) + "\"";
    if (res.objective) out += " objective=\"" + fmt17(*res.objective) + "\"";
    out += ">\n";
    if (res.hasIncumbent())
      for (int j = 0; j < inst.numVars; ++j)
        out += "  <var name=\"x" + std::to_string(j) + "\" value=\"" +
               fmt17(res.incumbent->values[j]) + "\"/>\n";
    out += "</solution>\n";
  } else {
    out = std::string("status ") + toString(res.status) + "\n";
    if (res.objective) out += "objective " + fmt17(*res.objective) + "\n";
    if (res.hasIncumbent())
      for (int j = 0; j < inst.numVars; ++j)
        out += "x" + std::to_string(j) + " " + fmt17(res.incumbent->values[j]) + "\n";
  }
  writeFile(solPath, out);
  if (poolSize > 0 && res.pool && !poolOut.empty())
    writeFile(poolOut, poolToText(*res.pool, inst.name));
  std::cout << "status " << toString(res.status);
  if (res.objective) std::cout << " objective " << fmt17(*res.objective);
  std::cout << "\n";
  return res.status == SolveStatus::Infeasible ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alternating prediction-correction MILP solving toolkit"};
  app.require_subcommand(1);

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "Generate CA or SC instances plus a manifest");
  gen->set_config("--config");
  std::string genFamily = "ca";
  int genCount = 10;
  std::uint64_t genSeed = 0;
  std::string genOut = "instances";
  CaParams caParams;
  ScParams scParams;
  gen->add_option("--family", genFamily, "Instance family: ca | sc")
      ->check(CLI::IsMember({"ca", "sc"}));
  gen->add_option("--count", genCount, "Number of instances");
  gen->add_option("--seed", genSeed, "Base seed; instance i uses seed+i");
  gen->add_option("--out", genOut, "Output directory");
  gen->add_option("--items", caParams.items, "CA: number of items");
  gen->add_option("--bids", caParams.bids, "CA: number of bids");
  gen->add_option("--add-item-prob", caParams.addItemProb, "CA: bundle growth probability");
  gen->add_option("--max-sub-items", caParams.maxSubItems, "CA: max items per bundle");
  gen->add_option("--additivity", caParams.additivity, "CA: superadditivity exponent");
  gen->add_option("--value-deviation", caParams.valueDeviation, "CA: private value deviation");
  gen->add_option("--rows", scParams.rows, "SC: number of rows to cover");
  gen->add_option("--cols", scParams.cols, "SC: number of columns");
  gen->add_option("--density", scParams.density, "SC: coverage density");
  gen->add_option("--max-cost", scParams.maxCost, "SC: maximum column cost");

  // ---- collect ----
  auto* collect = app.add_subcommand("collect", "Collect solution pools for instances");
  collect->set_config("--config");
  std::string collectDir, collectOut = "pools";
  int collectM = 20;
  BackendFlags collectBackend;
  collect->add_option("--instances", collectDir, "Directory of .lp files")->required();
  collect->add_option("--out", collectOut, "Output directory for .pool files");
  collect->add_option("--m", collectM, "Pool capacity (best m solutions)");
  collectBackend.attach(collect);

  // ---- train ----
  auto* trainCmd = app.add_subcommand("train", "Train the marginal predictor");
  trainCmd->set_config("--config");
  std::string trainData, trainVal, trainPools, trainValPools, trainOut = "model.apm";
  TrainConfig trainCfg;
  int trainAugment = 5;
  bool trainQuiet = false;
  trainCmd->add_option("--data", trainData, "Directory with .lp training instances")->required();
  trainCmd->add_option("--pools", trainPools,
                       "Directory with matching .pool files (default: --data)");
  trainCmd->add_option("--val", trainVal, "Validation directory (default: training data)");
  trainCmd->add_option("--val-pools", trainValPools,
                       "Pools for the validation instances (default: --val)");
  trainCmd->add_option("--out", trainOut, "Model output path");
  trainCmd->add_option("--seed", trainCfg.seed, "Init seed");
  trainCmd->add_option("--epochs", trainCfg.epochs, "Max epochs");
  trainCmd->add_option("--lr", trainCfg.learningRate, "Learning rate");
  trainCmd->add_option("--patience", trainCfg.patience, "Early-stopping patience (evaluations)");
  trainCmd->add_option("--eval-interval", trainCfg.evalInterval, "Epochs between evaluations");
  trainCmd->add_option("--hidden", trainCfg.hidden, "Hidden width");
  trainCmd->add_option("--augment", trainAugment,
                       "Reduced augmented instances per training instance (0 disables)");
  trainCmd->add_flag("--quiet", trainQuiet, "Suppress progress lines");

  // ---- predict ----
  auto* predictCmd = app.add_subcommand("predict", "Predict marginals for an instance");
  predictCmd->set_config("--config");
  std::string predictModel, predictInstance, predictOut = "marginals.csv", predictFeatures;
  predictCmd->add_option("--model", predictModel, "Trained predictor (.apm)");
  predictCmd->add_option("--instance", predictInstance, "Instance .lp file")->required();
  predictCmd->add_option("--out", predictOut, "Marginals CSV output");
  predictCmd->add_option("--features", predictFeatures,
                         "Also dump the bipartite-graph features to this binary file");

  // ---- correct ----
  auto* correctCmd =
      app.add_subcommand("correct", "One correction step: trust-region search plus fixing");
  correctCmd->set_config("--config");
  std::string corInstance, corMarginals;
  int corK0 = 0, corK1 = 0, corDelta = 0;
  std::string corOutReduced, corOutReport, corOutRef;
  BackendFlags corBackend;
  correctCmd->add_option("--instance", corInstance, "Instance .lp file")->required();
  correctCmd->add_option("--marginals", corMarginals, "Marginals CSV from predict")->required();
  correctCmd->add_option("--k0", corK0, "Variables fixed to 0");
  correctCmd->add_option("--k1", corK1, "Variables fixed to 1");
  correctCmd->add_option("--delta", corDelta, "Trust-region radius");
  correctCmd->add_option("--out-reduced", corOutReduced, "Reduced instance output (.lp)");
  correctCmd->add_option("--out-report", corOutReport, "Scoring report output (.csv)");
  correctCmd->add_option("--out-ref", corOutRef, "Reference solution output (.sol)");
  corBackend.attach(correctCmd);

  // ---- solve ----
  auto* solveCmd = app.add_subcommand("solve", "Full alternating prediction-correction run");
  solveCmd->set_config("--config");
  std::string solInstance, solSchedule;
  double solTotalBudget = 60.0;
  bool solCut = false;
  std::uint64_t solSeed = 0;
  std::string solOutSolution, solOutRecord, solOutTraj;
  PredictorFlags solPredictor;
  BackendFlags solBackend;
  solveCmd->add_option("--instance", solInstance, "Instance .lp file")->required();
  solveCmd->add_option("--schedule", solSchedule,
                       "Semicolon-separated k0,k1,delta,budget entries (default: scaled)");
  solveCmd->add_option("--total-budget", solTotalBudget, "Budget for the default schedule");
  solveCmd->add_flag("--cut", solCut, "Add the strict-improvement objective cut");
  solveCmd->add_option("--seed", solSeed, "Run seed (oracle predictor stream)");
  solveCmd->add_option("--out-solution", solOutSolution, "Best solution output");
  solveCmd->add_option("--out-record", solOutRecord, "Per-iteration CSV output");
  solveCmd->add_option("--out-traj", solOutTraj, "Trajectory CSV output");
  solPredictor.attach(solveCmd);
  solBackend.attach(solveCmd);

  // ---- experiment ----
  auto* expCmd = app.add_subcommand("experiment", "Batch runs with CSV artifacts");
  expCmd->set_config("--config");
  std::string expInstances, expStrategy = "apollo", expOut = "results", expSchedule, expBks;
  double expTotalBudget = 60.0;
  std::uint64_t expSeed = 0;
  int expWorkers = 1;
  bool expCut = false, expGnuplot = false;
  PredictorFlags expPredictor;
  BackendFlags expBackend;
  expCmd->add_option("--instances", expInstances, "Directory of .lp files")->required();
  expCmd->add_option("--strategy", expStrategy,
                     "apollo | direct | multips | baseline-solver")
      ->check(CLI::IsMember({"apollo", "direct", "multips", "baseline-solver"}));
  expCmd->add_option("--out", expOut, "Output directory");
  expCmd->add_option("--schedule", expSchedule, "Explicit schedule (default: scaled)");
  expCmd->add_option("--total-budget", expTotalBudget, "Total budget per instance");
  expCmd->add_option("--seed", expSeed, "Experiment seed");
  expCmd->add_option("--workers", expWorkers, "Concurrent instances");
  expCmd->add_flag("--cut", expCut, "Add the strict-improvement objective cut");
  expCmd->add_flag("--gnuplot-stub", expGnuplot, "Emit a ready gnuplot script");
  expCmd->add_option("--bks", expBks, "CSV file instance,bks overriding the BKS");
  expPredictor.attach(expCmd);
  expBackend.attach(expCmd);

  // ---- solve-lp ----
  auto* solveLp = app.add_subcommand(
      "solve-lp", "Exact enumeration solver over an LP file (external-backend target)");
  std::string slpFile, slpSol = "solution.sol", slpFormat = "plain", slpPoolOut;
  double slpTimelimit = 60.0;
  int slpMaxVars = 24, slpPool = 0;
  solveLp->add_option("lp", slpFile, "LP file")->required();
  solveLp->add_option("--sol", slpSol, "Solution output file");
  solveLp->add_option("--timelimit", slpTimelimit, "Accepted for compatibility");
  solveLp->add_option("--format", slpFormat, "plain | xml-lite")
      ->check(CLI::IsMember({"plain", "xml-lite"}));
  solveLp->add_option("--max-enum-vars", slpMaxVars, "Enumeration refusal threshold");
  solveLp->add_option("--pool", slpPool, "Also collect the best-m pool");
  solveLp->add_option("--pool-out", slpPoolOut, "Pool output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmdGenerate(genFamily, genCount, genSeed, genOut, caParams, scParams);

    if (*collect) {
      BackendConfig backend = collectBackend.build();
      fs::create_directories(collectOut);
      for (const MilpInstance& inst : loadInstances(collectDir)) {
        PoolCollection pc = collectPoolsForInstance(inst, backend, collectM);
        writeFile(fs::path(collectOut) / (inst.name + ".pool"),
                  poolToText(pc.pool, inst.name, pc.status));
        std::cout << inst.name << ": " << pc.pool.size() << " solutions (" << pc.status << ")\n";
      }
      return 0;
    }

    if (*trainCmd) {
      auto loadPairs = [](const fs::path& dir, const fs::path& poolDir) {
        std::vector<std::pair<MilpInstance, SolutionPool>> pairs;
        for (const fs::path& lpPath : listFiles(dir, ".lp")) {
          fs::path poolPath = poolDir / lpPath.filename();
          poolPath.replace_extension(".pool");
          if (!fs::exists(poolPath))
            throw ConfigError("no pool file for " + lpPath.string() + " (expected " +
                              poolPath.string() + ")");
          MilpInstance inst = readLp(readFile(lpPath));
          if (inst.name.empty()) inst.name = lpPath.stem().string();
          SolutionPool pool = poolFromText(readFile(poolPath), inst.numVars);
          if (pool.empty()) continue;  // infeasible instance, skip
          pairs.emplace_back(std::move(inst), std::move(pool));
        }
        return pairs;
      };
      std::vector<TrainSample> trainSet, valSet;
      Rng augRng(deriveSeed(trainCfg.seed, 0xA06));
      for (auto& [inst, pool] :
           loadPairs(trainData, trainPools.empty() ? trainData : trainPools)) {
        trainSet.push_back(makeTrainSample(inst, pool));
        if (trainAugment > 0) {
          for (MilpInstance& reduced : augment(inst, pool, augRng, trainAugment)) {
            SolutionPool filtered = filterPoolForReduced(reduced, pool);
            trainSet.push_back(makeTrainSample(std::move(reduced), filtered));
          }
        }
      }
      if (!trainVal.empty())
        for (auto& [inst, pool] :
             loadPairs(trainVal, trainValPools.empty() ? trainVal : trainValPools))
          valSet.push_back(makeTrainSample(std::move(inst), pool));
      if (!trainQuiet)
        trainCfg.progress = [](int epoch, double trainLoss, double valLoss) {
          if (epoch % 100 == 0)
            std::cout << "epoch " << epoch << " train " << trainLoss << " val " << valLoss
                      << "\n";
        };
      GnnModel model = train(trainSet, valSet, trainCfg);
      writeFile(trainOut, modelToText(model));
      std::cout << "trained on " << trainSet.size() << " samples, wrote " << trainOut << "\n";
      return 0;
    }

    if (*predictCmd) {
      MilpInstance inst = readLp(readFile(predictInstance));
      if (!predictFeatures.empty())
        writeFile(predictFeatures, dumpGraphBinary(featurize(inst)));
      if (predictModel.empty()) {
        if (predictFeatures.empty())
          throw ConfigError("predict: pass --model and/or --features");
        return 0;
      }
      GnnModel model = modelFromText(readFile(predictModel));
      MarginalPrediction pred = gnnForward(model, featurize(inst));
      writeFile(predictOut, marginalsCsv(inst, pred));
      std::cout << "wrote " << predictOut << " (" << pred.size() << " marginals)\n";
      return 0;
    }

    if (*correctCmd) {
      MilpInstance inst = readLp(readFile(corInstance));
      if (inst.name.empty()) inst.name = fs::path(corInstance).stem().string();
      MarginalPrediction pred = readMarginalsCsv(inst, readFile(corMarginals));
      std::string stem = (fs::path(corInstance).parent_path() / inst.name).string();
      if (corOutReduced.empty()) corOutReduced = stem + "_reduced.lp";
      if (corOutReport.empty()) corOutReport = stem + "_uebo.csv";
      if (corOutRef.empty()) corOutRef = stem + "_ref.sol";

      PartialAssignment partial =
          selectPartial(inst, pred, TrustRegionSpec{corK0, corK1, corDelta});
      MilpInstance trProblem = buildTrustRegion(inst, partial, corDelta);
      SolveResult res = solve(trProblem, corBackend.build());
      if (!res.hasIncumbent()) {
        std::cout << "trust-region search returned no incumbent (" << toString(res.status)
                  << "); nothing fixed\n";
        writeFile(corOutReduced, writeLp(inst));
        return 3;
      }
      const Assignment& ref = *res.incumbent;
      writeFile(corOutRef, solutionText(inst, ref, res.status, evaluateObjective(inst, ref)));
      writeFile(corOutReport, ueboCsv(ueboReport(inst, partial, pred, ref)));
      PartialAssignment consistent = fixConsistent(partial, ref);
      MilpInstance reduced = fixVariables(inst, consistent);
      writeFile(corOutReduced, writeLp(reduced));
      std::cout << "fixed " << consistent.size() << "/" << partial.size()
                << " variables, reference objective " << fmt17(evaluateObjective(inst, ref))
                << "\n";
      return 0;
    }

    if (*solveCmd) {
      MilpInstance inst = readLp(readFile(solInstance));
      if (inst.name.empty()) inst.name = fs::path(solInstance).stem().string();
      BackendConfig backend = solBackend.build();
      Schedule schedule = solSchedule.empty()
                              ? defaultSchedule(inst.numBinary(), solTotalBudget)
                              : parseSchedule(solSchedule);
      Predictor predictor = solPredictor.factory(backend)(inst, solSeed);
      RunOptions opts;
      opts.objectiveCut = solCut;
      RunRecord rec = runApollo(inst, predictor, schedule, backend, opts);
      std::cout << "status " << rec.status;
      if (rec.objective) std::cout << " objective " << fmt17(*rec.objective);
      std::cout << " elapsed " << rec.elapsedSec << "s\n";
      if (!solOutRecord.empty()) writeFile(solOutRecord, runRecordCsv(rec));
      if (!solOutTraj.empty()) writeFile(solOutTraj, trajectoryCsv(rec.trajectory));
      if (!solOutSolution.empty() && rec.best)
        writeFile(solOutSolution,
                  solutionText(inst, *rec.best, SolveStatus::Feasible, *rec.objective));
      return rec.objective ? 0 : 3;
    }

    if (*expCmd) {
      std::vector<MilpInstance> instances = loadInstances(expInstances);
      ExperimentConfig cfg;
      cfg.strategy = *experimentStrategyFromString(expStrategy);
      cfg.backend = expBackend.build();
      cfg.seed = expSeed;
      cfg.workers = expWorkers;
      cfg.objectiveCut = expCut;
      cfg.totalBudgetSec = expTotalBudget;
      if (!expSchedule.empty()) cfg.schedule = parseSchedule(expSchedule);
      if (cfg.strategy != ExperimentStrategy::BaselineSolver)
        cfg.predictorFactory = expPredictor.factory(cfg.backend);
      if (!expBks.empty()) {
        std::istringstream in(readFile(expBks));
        std::string line;
        while (std::getline(in, line)) {
          std::size_t comma = line.find(',');
          if (comma == std::string::npos || line.rfind("instance", 0) == 0) continue;
          cfg.bksOverride[line.substr(0, comma)] =
              std::strtod(line.c_str() + comma + 1, nullptr);
        }
      }
      if (instances.empty())
        std::cerr << "warning: no .lp instances under " << expInstances << "\n";
      ExperimentResult result = runExperiment(instances, cfg);
      fs::create_directories(expOut);
      writeFile(fs::path(expOut) / "results.csv", experimentCsv(result));
      for (const ExperimentRow& row : result.rows)
        if (!row.trajectory.empty())
          writeFile(fs::path(expOut) / ("traj_" + row.instance + ".csv"),
                    trajectoryCsv(row.trajectory));
      if (expGnuplot) {
        writeFile(fs::path(expOut) / "plot.gp",
                  "set datafile separator ','\n"
                  "set key outside\n"
                  "set xlabel 'time (s)'\n"
                  "set ylabel 'incumbent objective'\n"
                  "plot for [f in system('ls traj_*.csv')] f using 1:2 with steps title f\n");
      }
      if (result.aggregate.gapAbs)
        std::cout << "mean gapAbs " << fmt17(*result.aggregate.gapAbs) << " over "
                  << result.rows.size() << " instances\n";
      else
        std::cout << "wrote results for " << result.rows.size() << " instances\n";
      return 0;
    }

    if (*solveLp)
      return cmdSolveLp(slpFile, slpSol, slpTimelimit, slpFormat, slpMaxVars, slpPool,
                        slpPoolOut);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
