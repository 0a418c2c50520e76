#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "whiteout/bounds.hpp"
#include "whiteout/error.hpp"
#include "whiteout/filter.hpp"
#include "whiteout/io.hpp"
#include "whiteout/parallel.hpp"

namespace whiteout::cli {

using nlohmann::json;

namespace {

// Raw flag values; empty optionals fall back to the --config file, then defaults.
struct Flags {
  std::vector<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string config;
  std::optional<double> sigma2;
  std::optional<double> sigma_hat;
  std::optional<int> n;
  std::optional<std::string> delta;
  std::optional<std::string> strategy;
  std::string out;

  std::optional<std::string> beta_hat;
  std::optional<std::string> cov;
  std::optional<std::string> beta_true;
  std::optional<double> beta0;
  std::optional<int> d1;
  std::optional<double> pi1;
  std::optional<long> mcc_d;
  std::optional<double> rho;
  std::optional<int> top_l;
  std::optional<int> replicates;
  std::optional<double> margin;
  bool walk = false;
  bool liberal = false;
};

class Settings {
 public:
  Settings(const Flags& f, json cfg) : f_(f), cfg_(std::move(cfg)) {}

  template <class T>
  std::optional<T> pick(const std::optional<T>& flag, const char* key) const {
    if (flag) return flag;
    if (cfg_.contains(key)) return cfg_.at(key).get<T>();
    return std::nullopt;
  }

  std::vector<double> alphas(std::vector<double> fallback) const {
    if (!f_.alpha.empty()) return f_.alpha;
    if (cfg_.contains("alpha")) {
      const auto& a = cfg_.at("alpha");
      return a.is_array() ? a.get<std::vector<double>>() : std::vector<double>{a.get<double>()};
    }
    return fallback;
  }

  std::uint64_t seed() const { return pick(f_.seed, "seed").value_or(20240101); }
  int threads() const { return resolve_threads(pick(f_.threads, "threads").value_or(0)); }
  const json& config() const { return cfg_; }
  const Flags& flags() const { return f_; }

 private:
  const Flags& f_;
  json cfg_;
};

void check_alphas(const std::vector<double>& as) {
  require(!as.empty(), ErrorKind::ParameterOutOfRange, "no alpha given");
  for (double a : as)
    require(a > 0 && a < 1, ErrorKind::ParameterOutOfRange,
            "alpha must be in (0, 1), got " + format_double(a));
}

void check_file(const std::optional<std::string>& p, const char* what) {
  require(p.has_value(), ErrorKind::ParameterOutOfRange, std::string("missing ") + what);
  require(std::filesystem::exists(*p), ErrorKind::Io, std::string(what) + " not found: " + *p);
}

json num(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? json("nan") : json(x > 0 ? "inf" : "-inf");
}

// Outputs are buffered and only written once every computation succeeded.
class Artifacts {
 public:
  explicit Artifacts(std::string dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string body) { files_.emplace_back(name, std::move(body)); }
  void add(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }
  void commit() const {
    if (dir_.empty()) return;
    std::filesystem::create_directories(dir_);
    for (const auto& [name, body] : files_)
      write_file_atomic((std::filesystem::path(dir_) / name).string(), body);
  }

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

json constants_row(const BoundConstants& c) {
  return {{"alpha", c.alpha},         {"delta", c.delta},         {"p", c.p},
          {"q_delta", c.q_delta},     {"lambda_star", c.lambda_star}, {"c_h", c.c_h},
          {"c1", c.c1},               {"c2", c.c2},               {"c3", c.c3},
          {"c1_star_lk", c.c1_star_k}, {"c2_star_lk", c.c2_star_k},
          {"c1_star_l1", c.c1_star_1}, {"c2_star_l1", c.c2_star_1}};
}

json report_json(const BoundReport& r) {
  return {{"mode", to_string(r.mode)}, {"k", r.k},         {"ceiling", num(r.ceiling)},
          {"slope", r.slope},          {"intercept", r.intercept}, {"alpha", r.alpha},
          {"sigma2", r.sigma2},        {"pi1", r.pi1}};
}

// Covariance and b_k: either from --cov or the closed-form MCC (--mcc-d, --rho).
struct Structure {
  std::optional<CovarianceMatrix> sigma;
  DeltaLowerBounds b;
  long d = 0;
};

Structure load_structure(const Settings& s) {
  const Flags& f = s.flags();
  auto mcc_d = s.pick(f.mcc_d, "mcc_d");
  Structure st;
  if (mcc_d) {
    auto rho = s.pick(f.rho, "rho");
    require(rho.has_value(), ErrorKind::ParameterOutOfRange, "--mcc-d needs --rho");
    st.b = mcc_lower_bounds(*mcc_d, *rho);
    st.d = *mcc_d;
    return st;
  }
  auto cov = s.pick(f.cov, "cov");
  check_file(cov, "--cov");
  st.sigma = CovarianceMatrix(read_matrix_csv(*cov));
  st.d = st.sigma->dim();
  st.b = delta_order_lower_bounds(st.sigma->eigen(), s.pick(f.top_l, "top_l").value_or(50),
                                  s.threads());
  return st;
}

// Squared coefficients from --beta-true, or beta0 on d1 (or pi1 d) coordinates.
VectorXd load_beta_sq(const Settings& s, long d) {
  const Flags& f = s.flags();
  if (auto path = s.pick(f.beta_true, "beta_true")) {
    check_file(path, "--beta-true");
    VectorXd b = read_vector_file(*path);
    require(b.size() == d, ErrorKind::Dimension, "--beta-true length does not match dimension");
    return b.cwiseAbs2();
  }
  auto beta0 = s.pick(f.beta0, "beta0");
  require(beta0.has_value(), ErrorKind::ParameterOutOfRange, "need --beta-true or --beta0");
  long d1 = d;
  if (auto v = s.pick(f.d1, "d1"))
    d1 = *v;
  else if (auto p = s.pick(f.pi1, "pi1"))
    d1 = std::lround(*p * d);
  require(d1 >= 1 && d1 <= d, ErrorKind::ParameterOutOfRange, "non-null count outside [1, d]");
  VectorXd bsq = VectorXd::Zero(d);
  bsq.head(d1).setConstant(*beta0 * *beta0);
  return bsq;
}

std::string bk_csv(const DeltaLowerBounds& b) {
  std::string out = "k,b_k\n";
  for (long k = 1; k <= b.size(); ++k)
    out += std::to_string(k) + "," + format_double(b.at(k)) + "\n";
  return out;
}

json cmd_constants(const Settings& s, Artifacts& art) {
  auto alphas = s.alphas({0.05, 0.1, 0.2});
  check_alphas(alphas);
  json j = constants_json(alphas, s.pick(s.flags().margin, "delta_margin"));
  art.add("constants.json", j);
  return j;
}

json cmd_bounds(const Settings& s, Artifacts& art) {
  auto alphas = s.alphas({0.05});
  check_alphas(alphas);
  auto st = load_structure(s);
  VectorXd bsq = load_beta_sq(s, st.d);
  double sigma2 = s.pick(s.flags().sigma2, "sigma2").value_or(1.0);
  require(sigma2 > 0, ErrorKind::ParameterOutOfRange, "sigma2 must be > 0");
  double pi1 = static_cast<double>((bsq.array() != 0).count()) / st.d;
  json reports = json::array();
  for (double a : alphas) {
    auto c = starred_constants(a);
    json row = {{"alpha", a}};
    row["thm1_lk"] = report_json(theorem_main_bound(bsq, sigma2, st.b, a, false, c));
    row["thm1_l1"] = report_json(theorem_main_bound(bsq, sigma2, st.b, a, true, c));
    row["thm2_lk"] = report_json(theorem_random_bound(bsq, sigma2, st.b, a, pi1, false, c));
    row["thm2_l1"] = report_json(theorem_random_bound(bsq, sigma2, st.b, a, pi1, true, c));
    reports.push_back(row);
  }
  json j = {{"d", st.d}, {"d1", (bsq.array() != 0).count()}, {"reports", reports}};
  if (auto rho = s.pick(s.flags().rho, "rho"); rho && !st.sigma)
    j["mcc_closed_form"] = mcc_closed_form(st.d, *rho);
  art.add("bounds.json", j);
  art.add("b_k.csv", bk_csv(st.b));
  return j;
}

json cmd_t3(const Settings& s, Artifacts& art) {
  auto alphas = s.alphas({0.05});
  check_alphas(alphas);
  auto st = load_structure(s);
  VectorXd bsq = load_beta_sq(s, st.d);
  double sigma2 = s.pick(s.flags().sigma2, "sigma2").value_or(1.0);
  int reps = s.pick(s.flags().replicates, "replicates").value_or(1000);
  require(reps >= 1, ErrorKind::ParameterOutOfRange, "replicates must be >= 1");
  double pi1 = static_cast<double>((bsq.array() != 0).count()) / st.d;
  json rows = json::array();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    double a = alphas[i];
    std::uint64_t seed = hash_ids({s.seed(), i});
    json row = {{"alpha", a}};
    if (s.flags().walk) {
      // Random-walk bound with k from the l = 1 condition.
      auto rep = theorem_main_bound(bsq, sigma2, st.b, a, true);
      require(rep.k <= st.d, ErrorKind::Inapplicable, "condition never met; walk undefined");
      double delta = s.pick(s.flags().margin, "delta_margin").value_or(default_delta(a));
      auto e = simulate_eta_walk_bound(rep.k, st.d, a, delta, reps, seed, s.threads());
      row["k"] = rep.k;
      row["theorem_ceiling"] = num(rep.ceiling);
      row["walk_mean_rejections"] = e.mean;
      row["walk_mcse"] = e.mcse;
    } else {
      auto res = t3_knockoff_star(st.b, bsq, sigma2, a, reps, seed, s.threads());
      auto ceiling = theorem_random_bound(bsq, sigma2, st.b, a, pi1, false);
      row["tpr"] = res.tpr.mean;
      row["tpr_mcse"] = res.tpr.mcse;
      row["mean_rejections"] = res.rejections.mean;
      row["rejections_mcse"] = res.rejections.mcse;
      row["thm2_ceiling"] = num(ceiling.ceiling);
      std::map<int, int> hist;
      for (int c : res.rejection_counts) ++hist[c];
      std::string csv = "count,frequency\n";
      for (auto [c, n] : hist)
        csv += std::to_string(c) + "," + format_double(static_cast<double>(n) / reps) + "\n";
      art.add("histogram_alpha" + format_double(a) + ".csv", csv);
    }
    rows.push_back(row);
  }
  json j = {{"d", st.d}, {"d1", (bsq.array() != 0).count()}, {"replicates", reps},
            {"results", rows}};
  art.add("t3.json", j);
  return j;
}

json cmd_diagnose(const Settings& s, Artifacts& art) {
  auto alphas = s.alphas({0.05});
  check_alphas(alphas);
  const double alpha = alphas.front();
  auto cov = s.pick(s.flags().cov, "cov");
  check_file(cov, "--cov");
  CovarianceMatrix sigma(read_matrix_csv(*cov));
  VectorXd delta = make_equi_delta(sigma);
  const std::vector<double> thresholds{6.0, 10.0, 11.7};
  auto diag = delta_diagnostic(delta, alpha, thresholds);
  auto b = delta_order_lower_bounds(sigma.eigen(), s.pick(s.flags().top_l, "top_l").value_or(50),
                                    s.threads());
  json counts = json::object();
  for (std::size_t i = 0; i < thresholds.size(); ++i)
    counts[format_double(thresholds[i])] = diag.counts_below[i];
  json fd = json::object();
  for (double c : {0.25, 0.5, 1.0, 2.0}) fd[format_double(c)] = leading_eigvec_cdf(sigma.eigen(), c);
  const int d = sigma.dim();
  // Few small Delta_jj means only very strong signals can be rejected.
  bool viable = diag.counts_below[1] >= std::max(1, d / 10);
  json j = {{"d", d},
            {"alpha", alpha},
            {"lambda_max", sigma.lambda_max()},
            {"delta_equi_min", delta.minCoeff()},
            {"delta_equi_max", delta.maxCoeff()},
            {"counts_below", counts},
            {"snr_threshold_min", diag.snr.minCoeff()},
            {"snr_threshold_max", diag.snr.maxCoeff()},
            {"leading_eigvec_cdf", fd},
            {"verdict", viable ? "knockoffs viable" : "warning: whitening noise dominates"}};
  std::string csv = "index,delta_equi,snr_threshold,b_k\n";
  for (int i = 0; i < d; ++i)
    csv += std::to_string(i + 1) + "," + format_double(delta(i)) + "," +
           format_double(diag.snr(i)) + "," + format_double(b.b(i)) + "\n";
  art.add("diagnose.json", j);
  art.add("diagnose.csv", csv);
  return j;
}

json cmd_filter(const Settings& s, Artifacts& art) {
  const Flags& f = s.flags();
  auto alphas = s.alphas({0.1});
  check_alphas(alphas);
  auto bh_path = s.pick(f.beta_hat, "beta_hat");
  check_file(bh_path, "--beta-hat");
  auto cov = s.pick(f.cov, "cov");
  check_file(cov, "--cov");
  VectorXd beta_hat = read_vector_file(*bh_path);
  CovarianceMatrix sigma(read_matrix_csv(*cov));
  require(beta_hat.size() == sigma.dim(), ErrorKind::Dimension,
          "beta_hat length does not match covariance dimension");

  NoiseModel noise;
  auto sigma2 = s.pick(f.sigma2, "sigma2");
  auto sigma_hat = s.pick(f.sigma_hat, "sigma_hat");
  if (sigma2) {
    require(!sigma_hat, ErrorKind::ParameterOutOfRange, "give --sigma2 or --sigma-hat, not both");
    noise = KnownSigma{*sigma2};
  } else {
    auto n = s.pick(f.n, "n");
    require(sigma_hat && n, ErrorKind::ParameterOutOfRange,
            "need --sigma2, or --sigma-hat with --n");
    noise = CarveSigma{*sigma_hat * *sigma_hat, *n};
  }

  std::string dsrc = s.pick(f.delta, "delta").value_or("equi");
  VectorXd delta;
  if (dsrc == "equi") {
    delta = make_equi_delta(sigma);
  } else if (dsrc.rfind("file:", 0) == 0) {
    std::optional<std::string> p = dsrc.substr(5);
    check_file(p, "--delta file");
    delta = read_vector_file(*p);
  } else {
    fail(ErrorKind::ParameterOutOfRange, "--delta must be 'equi' or 'file:<path>'");
  }
  auto plan = validate_delta(sigma, delta);

  std::string strat = s.pick(f.strategy, "strategy").value_or("lasso");
  Strategy strategy;
  if (strat == "oracle") {
    auto bt = s.pick(f.beta_true, "beta_true");
    check_file(bt, "--beta-true (oracle strategy)");
    VectorXd beta = read_vector_file(*bt);
    require(beta.size() == sigma.dim(), ErrorKind::Dimension, "--beta-true length mismatch");
    strategy = OracleStrategy{beta};
  } else if (strat == "lasso") {
    strategy = LassoStrategy{};
  } else {
    fail(ErrorKind::ParameterOutOfRange, "--strategy must be oracle or lasso");
  }

  const double alpha = alphas.front();
  Stream rng(s.seed());
  auto res = run_whitening_filter(beta_hat, plan, noise, strategy, alpha, rng);
  std::vector<char> rejected(sigma.dim(), 0);
  for (int j : res.rejections) rejected[j] = 1;

  std::string csv = "rank,index,W,W_star,psi,p_tilde,fdp_hat,rejected,eta_if_oracle\n";
  for (std::size_t i = 0; i < res.ordering.order.size(); ++i) {
    int j = res.ordering.order[i];
    csv += std::to_string(i + 1) + "," + std::to_string(j + 1) + ",";
    csv += (res.w ? format_double(res.w->w(j)) : "") + ",";
    csv += (res.w ? format_double(res.w->w_star(j)) : "") + ",";
    csv += std::to_string(res.ordering.psi[j]) + "," + format_double(res.pvalues.p[i]) + ",";
    double fdp = res.seqstep.fdp_hat_path[i];
    csv += (std::isinf(fdp) ? std::string("inf") : format_double(fdp)) + ",";
    csv += std::string(rejected[j] ? "1" : "0") + ",";
    csv += (res.eta ? format_double(res.eta->eta(j)) : "") + "\n";
  }

  auto diag = delta_diagnostic(plan.delta, alpha, {6.0, 10.0, 11.7});
  json rej = json::array();
  for (std::size_t i = 0; i < res.rejections.size(); ++i)
    rej.push_back({{"index", res.rejections[i] + 1}, {"direction", res.directions[i]}});
  json j = {{"alpha", alpha},
            {"strategy", strat},
            {"k_hat", res.seqstep.k_hat},
            {"rejection_count", res.rejections.size()},
            {"rejections", rej},
            {"rank_r", res.rank_r},
            {"delta_min", plan.delta.minCoeff()},
            {"delta_max", plan.delta.maxCoeff()},
            {"delta_counts_below", {{"6", diag.counts_below[0]},
                                    {"10", diag.counts_below[1]},
                                    {"11.7", diag.counts_below[2]}}}};
  if (res.sigma_tilde_sq) j["sigma_tilde_sq"] = *res.sigma_tilde_sq;
  if (diag.counts_below[2] == 0) j["warning"] = "no Delta_jj below 11.7; expect few rejections";
  art.add("filter.csv", csv);
  art.add("summary.json", j);
  return j;
}

json cmd_simulate(const Settings& s, Artifacts& art) {
  const Flags& f = s.flags();
  MonteCarloConfig cfg = config_from_json(s.config());
  cfg.alphas = s.alphas(cfg.alphas);
  check_alphas(cfg.alphas);
  if (f.seed) cfg.scenario.seed = *f.seed;
  if (f.replicates) cfg.replicates = *f.replicates;
  if (f.sigma2) cfg.scenario.sigma2 = *f.sigma2;
  cfg.threads = s.threads();
  auto sum = run_scenario(cfg);

  json rows = json::array();
  for (const auto& r : sum.rows)
    rows.push_back({{"method", to_string(r.method)},
                    {"alpha", r.alpha},
                    {"fdr", num(r.fdr.mean)},
                    {"fdr_mcse", num(r.fdr.mcse)},
                    {"tpr", num(r.tpr.mean)},
                    {"tpr_mcse", num(r.tpr.mcse)},
                    {"mean_rejections", num(r.rejections.mean)},
                    {"rejections_mcse", num(r.rejections.mcse)}});
  json j = {{"d", sum.d},
            {"d1", sum.d1},
            {"replicates", cfg.replicates},
            {"seed", cfg.scenario.seed},
            {"lambda_max", sum.lambda_max},
            {"summary", rows}};
  std::string csv = "replicate,method,alpha,R,V,FDP,TPP\n";
  for (const auto& rec : sum.records)
    csv += std::to_string(rec.replicate + 1) + "," + to_string(rec.method) + "," +
           format_double(rec.alpha) + "," + std::to_string(rec.r) + "," + std::to_string(rec.v) +
           "," + format_double(rec.fdp) + "," +
           (std::isnan(rec.tpp) ? std::string("") : format_double(rec.tpp)) + "\n";
  art.add("summary.json", j);
  art.add("replicates.csv", csv);
  return j;
}

json error_json(const std::string& kind, const std::string& msg) {
  return {{"error", kind}, {"message", msg}};
}

}  // namespace

json constants_json(const std::vector<double>& alphas, std::optional<double> delta) {
  json rows = json::array();
  for (double a : alphas) {
    auto c = starred_constants(a, delta);
    rows.push_back(constants_row(c));
  }
  return {{"constants", rows}};
}

MonteCarloConfig config_from_json(const json& j) {
  static const std::set<std::string> known{
      "family", "d",     "rho",        "m",         "m0",      "k",        "lambda",
      "n",      "d1",    "pi1",        "beta0",     "sigma2",  "seed",     "support",
      "design_cov", "cov", "replicates", "methods", "alpha",   "threads",  "top_l",
      "delta_inflation", "support_indices"};
  for (const auto& [key, _] : j.items())
    require(known.count(key) > 0, ErrorKind::ParameterOutOfRange, "unknown config key: " + key);
  MonteCarloConfig c;
  ScenarioSpec& s = c.scenario;
  if (j.contains("family")) s.family = parse_family(j.at("family").get<std::string>());
  s.d = j.value("d", s.d);
  s.rho = j.value("rho", s.rho);
  s.m = j.value("m", s.m);
  s.m0 = j.value("m0", s.m0);
  s.k = j.value("k", s.k);
  s.lambda = j.value("lambda", s.lambda);
  s.n = j.value("n", s.n);
  s.d1 = j.value("d1", s.d1);
  s.pi1 = j.value("pi1", s.pi1);
  s.beta0 = j.value("beta0", s.beta0);
  s.sigma2 = j.value("sigma2", s.sigma2);
  s.seed = j.value("seed", s.seed);
  if (j.contains("design_cov")) s.design_cov = parse_design_cov(j.at("design_cov").get<std::string>());
  if (j.contains("cov")) s.cov_path = j.at("cov").get<std::string>();
  if (j.contains("support")) {
    auto sup = j.at("support").get<std::string>();
    require(sup == "uniform-random" || sup == "fixed", ErrorKind::ParameterOutOfRange,
            "support must be uniform-random or fixed");
    s.support = sup == "fixed" ? Support::Fixed : Support::UniformRandom;
  }
  if (j.contains("support_indices"))
    for (int idx : j.at("support_indices").get<std::vector<int>>()) s.support_indices.push_back(idx - 1);
  c.replicates = j.value("replicates", c.replicates);
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
  }
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    c.alphas = a.is_array() ? a.get<std::vector<double>>() : std::vector<double>{a.get<double>()};
  }
  c.top_l = j.value("top_l", c.top_l);
  c.delta_inflation = j.value("delta_inflation", c.delta_inflation);
  s.validate();
  return c;
}

int run(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"whiteout: whitening knockoffs, power bounds and simulators"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--alpha", f.alpha, "FDR level(s)")->delimiter(',');
  app.add_option("--seed", f.seed, "64-bit seed");
  app.add_option("--threads", f.threads, "worker threads (default: WHITEOUT_THREADS, then all cores)");
  app.add_option("--config", f.config, "JSON config; flags take precedence");
  auto* o_s2 = app.add_option("--sigma2", f.sigma2, "known noise variance");
  auto* o_sh = app.add_option("--sigma-hat", f.sigma_hat, "residual standard deviation (carving)");
  app.add_option("--n", f.n, "rows behind --sigma-hat");
  o_s2->excludes(o_sh);
  app.add_option("--delta", f.delta, "equi | file:<path>");
  app.add_option("--strategy", f.strategy, "oracle | lasso");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--beta-hat", f.beta_hat, "estimate, one value per line");
  app.add_option("--cov", f.cov, "covariance CSV (headerless)");
  app.add_option("--beta-true", f.beta_true, "true coefficients, one per line");
  app.add_option("--beta0", f.beta0, "common non-null magnitude");
  app.add_option("--d1", f.d1, "non-null count");
  app.add_option("--pi1", f.pi1, "non-null proportion");
  app.add_option("--mcc-d", f.mcc_d, "closed-form MCC dimension (with --rho)");
  app.add_option("--rho", f.rho, "MCC correlation");
  app.add_option("--top-l", f.top_l, "eigenvectors used for b_k (0 = all)");
  app.add_option("--replicates", f.replicates, "Monte Carlo replicates");
  app.add_option("--delta-margin", f.margin, "override delta = sqrt(alpha) - alpha");
  app.add_flag("--walk", f.walk, "t3: simulate the random-walk bound instead");

  auto* c_bounds = app.add_subcommand("bounds", "b_k and theorem ceilings");
  auto* c_sim = app.add_subcommand("simulate", "scenario power study");
  auto* c_filter = app.add_subcommand("filter", "run the whitening filter on (beta_hat, Sigma)");
  auto* c_t3 = app.add_subcommand("t3", "T3-knockoff* Monte Carlo bound");
  auto* c_diag = app.add_subcommand("diagnose", "Delta diagnostics for a covariance");
  auto* c_const = app.add_subcommand("constants", "bound constants per alpha");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    out << error_json("usage", e.what()).dump(2) << "\n";
    return 2;
  }

  try {
    json cfg = json::object();
    if (!f.config.empty()) {
      std::ifstream in(f.config);
      if (!in) throw ParseError(f.config, 0, "cannot open config");
      try {
        cfg = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ParseError(f.config, 0, e.what());
      }
    }
    Settings s(f, cfg);
    Artifacts art(f.out);
    json result;
    if (c_const->parsed()) result = cmd_constants(s, art);
    else if (c_bounds->parsed()) result = cmd_bounds(s, art);
    else if (c_t3->parsed()) result = cmd_t3(s, art);
    else if (c_diag->parsed()) result = cmd_diagnose(s, art);
    else if (c_filter->parsed()) result = cmd_filter(s, art);
    else if (c_sim->parsed()) result = cmd_simulate(s, art);
    art.commit();
    out << result.dump(2) << "\n";
    return 0;
  } catch (const ParseError& e) {
    json j = error_json(to_string(e.kind()), e.what());
    j["file"] = e.path();
    j["row"] = e.row();
    out << j.dump(2) << "\n";
    return 2;
  } catch (const WhiteoutError& e) {
    out << error_json(to_string(e.kind()), e.what()).dump(2) << "\n";
    return 2;
  } catch (const json::exception& e) {
    out << error_json("config", e.what()).dump(2) << "\n";
    return 2;
  } catch (const std::exception& e) {
    out << error_json("internal", e.what()).dump(2) << "\n";
    return 1;
  }
}

}  // namespace whiteout::cli
