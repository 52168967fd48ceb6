// Command line front end: compute a CS decomposition from a matrix file,
// verify stored factors, or run one of the built-in stability experiments.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "csd/driver.hpp"
#include "csd/experiments.hpp"
#include "csd/matrix_io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

csd::ShiftStrategy parseShift(const std::string& name) {
  if (name == "wilkinson") return csd::ShiftStrategy::Wilkinson;
  if (name == "perfect") return csd::ShiftStrategy::Perfect;
  if (name == "zero") return csd::ShiftStrategy::Zero;
  throw csd::InvalidInputError("unknown shift strategy: " + name);
}

nlohmann::json reportJson(const csd::ResidualReport& r) {
  return nlohmann::json{{"epsilonIn", r.epsilonIn}, {"orthoU1", r.orthoU1},
                        {"orthoU2", r.orthoU2},     {"orthoV1", r.orthoV1},
                        {"orthoV2", r.orthoV2},     {"e11", r.e11},
                        {"e12", r.e12},             {"e21", r.e21},
                        {"e22", r.e22},             {"iterations", r.iterations}};
}

void writeTheta(const std::string& path, const std::vector<csd::AnglePair>& theta) {
  std::ofstream os(path);
  if (!os) throw csd::InvalidInputError("cannot open for writing: " + path);
  for (const csd::AnglePair& t : theta) os << csd::formatDouble(t.value) << '\n';
}

std::vector<csd::AnglePair> readTheta(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw csd::InvalidInputError("cannot open for reading: " + path);
  std::vector<csd::AnglePair> theta;
  double v;
  while (is >> v) theta.push_back(csd::AnglePair::fromValue(v));
  return theta;
}

template <typename T>
int computeWith(const csd::DenseMatrix<T>& x, int p, int q, const csd::CsdConfig& config,
                const std::string& outDir) {
  csd::CsdProblem<T> problem{x, p, q};
  auto [factors, report] = csd::computeCsd(problem, config);

  fs::create_directories(outDir);
  writeTheta((fs::path(outDir) / "theta.txt").string(), factors.theta);
  csd::writeMatrixFile((fs::path(outDir) / "U1.mat").string(), factors.U1);
  csd::writeMatrixFile((fs::path(outDir) / "U2.mat").string(), factors.U2);
  csd::writeMatrixFile((fs::path(outDir) / "V1.mat").string(), factors.V1);
  csd::writeMatrixFile((fs::path(outDir) / "V2.mat").string(), factors.V2);

  nlohmann::json j;
  j["schemaVersion"] = 1;
  j["m"] = problem.m();
  j["p"] = p;
  j["q"] = q;
  j["metrics"] = reportJson(report);
  std::ofstream os(fs::path(outDir) / "report.json");
  os << j.dump(2) << '\n';

  std::cout << j.dump(2) << '\n';
  return kExitPass;
}

template <typename T>
csd::DenseMatrix<T> loadFactor(const std::string& dir, const char* name);

template <>
csd::Matrix loadFactor<double>(const std::string& dir, const char* name) {
  return csd::readMatrixFile((fs::path(dir) / name).string()).toReal();
}

template <>
csd::ComplexMatrix loadFactor<std::complex<double>>(const std::string& dir, const char* name) {
  return csd::readMatrixFile((fs::path(dir) / name).string()).toComplex();
}

template <typename T>
int verifyWith(const csd::DenseMatrix<T>& x, const std::string& factorsDir, double bound) {
  csd::CsdFactors<T> f;
  f.theta = readTheta((fs::path(factorsDir) / "theta.txt").string());
  f.U1 = loadFactor<T>(factorsDir, "U1.mat");
  f.U2 = loadFactor<T>(factorsDir, "U2.mat");
  f.V1 = loadFactor<T>(factorsDir, "V1.mat");
  f.V2 = loadFactor<T>(factorsDir, "V2.mat");

  int m = x.rows();
  int p = f.U1.rows(), q = f.V1.rows();
  csd::CsdProblem<T> problem{x, p, q};
  csd::ResidualReport rep = csd::residualReport(problem, f);

  double eps = std::max(10.0 * csd::kEps, rep.epsilonIn);
  bool pass = rep.maxMetric() <= bound * eps;

  nlohmann::json j;
  j["schemaVersion"] = 1;
  j["m"] = m;
  j["p"] = p;
  j["q"] = q;
  j["metrics"] = reportJson(rep);
  j["epsilon"] = eps;
  j["bound"] = bound;
  j["pass"] = pass;
  std::cout << j.dump(2) << '\n';
  return pass ? kExitPass : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complete CS decomposition of a partitioned unitary matrix"};
  app.require_subcommand(1);

  // compute
  std::string inPath, outDir = "csd-out", shiftName = "wilkinson";
  int p = 0, q = 0;
  double tau = 8.0 * csd::kEps;
  bool sortTheta = false;
  CLI::App* compute = app.add_subcommand("compute", "Compute the CSD of a matrix file");
  compute->add_option("--input", inPath, "matrix file")->required();
  compute->add_option("--p", p, "row split")->required();
  compute->add_option("--q", q, "column split")->required();
  compute->add_option("--output-dir", outDir, "output directory");
  compute->add_option("--shift", shiftName, "wilkinson|perfect|zero");
  compute->add_option("--tau", tau, "negligibility threshold");
  compute->add_flag("--sort-theta", sortTheta, "sort theta ascending");

  // verify
  std::string verifyInput, factorsDir;
  double verifyBound = 10.0;
  CLI::App* verify = app.add_subcommand("verify", "Recompute residuals for stored factors");
  verify->add_option("--input", verifyInput, "matrix file")->required();
  verify->add_option("--factors", factorsDir, "directory written by compute")->required();
  verify->add_option("--bound", verifyBound, "pass when every metric <= bound * epsilon");

  // experiment
  std::string expName, jsonPath;
  int expTrials = -1;
  uint64_t expSeed = 0;
  bool seedSet = false;
  std::string expShift = "wilkinson";
  CLI::App* experiment = app.add_subcommand("experiment", "Run a built-in stability experiment");
  experiment->add_option("name", expName, "vanloan|haar|clustered|angles-uniform|angles-grid")
      ->required();
  experiment->add_option("--trials", expTrials, "trial count (default: experiment standard)");
  experiment->add_option("--seed", expSeed, "base seed")->each([&](const std::string&) {
    seedSet = true;
  });
  experiment->add_option("--json", jsonPath, "write the full JSON report here");
  experiment->add_option("--shift", expShift, "wilkinson|perfect|zero");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*compute) {
      csd::CsdConfig config;
      config.strategy = parseShift(shiftName);
      config.tau = tau;
      config.sortTheta = sortTheta;
      csd::LoadedMatrix in = csd::readMatrixFile(inPath);
      if (in.hasImag) return computeWith(in.toComplex(), p, q, config, outDir);
      return computeWith(in.re, p, q, config, outDir);
    }
    if (*verify) {
      csd::LoadedMatrix in = csd::readMatrixFile(verifyInput);
      if (in.hasImag) return verifyWith(in.toComplex(), factorsDir, verifyBound);
      return verifyWith(in.re, factorsDir, verifyBound);
    }
    if (*experiment) {
      csd::ExperimentConfig config = csd::defaultExperimentConfig(expName);
      if (expTrials > 0) config.trials = expTrials;
      if (seedSet) config.seed = expSeed;
      config.shiftStrategy = parseShift(expShift);
      csd::ExperimentReport rep = csd::runExperiment(config);
      if (!jsonPath.empty()) {
        std::ofstream os(jsonPath);
        if (!os) throw csd::InvalidInputError("cannot open for writing: " + jsonPath);
        os << csd::reportToJson(rep);
      }
      std::cout << (rep.pass ? "PASS" : "FAIL") << ' ' << config.name << ": " << config.trials
                << " trial(s), " << rep.failures << " failure(s), max metric "
                << rep.aggregate.maxMetric() << ", max epsilon " << rep.maxEpsilon << ", "
                << rep.wallSeconds << " s\n";
      return rep.pass ? kExitPass : kExitNumerical;
    }
  } catch (const csd::RejectedInputError& e) {
    std::cerr << "error: " << e.what() << " (defect " << e.defect << ")\n";
    return kExitNumerical;
  } catch (const csd::ConvergenceFailure& e) {
    std::cerr << "error: " << e.what() << " after " << e.iterations << " iterations\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
