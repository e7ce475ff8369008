// catmap: verification suites, character sweeps and distribution reports for the quantized cat map.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "catmap/distribution.hpp"
#include "catmap/error.hpp"
#include "catmap/expsum.hpp"
#include "catmap/hecke.hpp"
#include "catmap/io.hpp"
#include "catmap/modarith.hpp"
#include "catmap/quantization.hpp"
#include "catmap/suites.hpp"

namespace {

using namespace catmap;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

/// Raised for anything wrong with the requested run rather than with the computation.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::vector<i64> matrix{2, 1, 1, 1};
  std::vector<i64> ps;
  std::vector<int> ks;
  std::vector<i64> nus{1};
  std::string obs;
  u64 seed = 1;
  std::string out;
  std::string format;
  int jobs = 1;
  std::size_t samples = 100000;
  bool real = false;
};

struct Flags {
  std::string matrix, p, k, nu, obs, out, format, config;
  u64 seed = 1;
  int jobs = 1;
  std::size_t samples = 100000;
  bool real = false;
};

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<T>(v));
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad integer in --") + what + ": '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string("--") + what + " is empty");
  return out;
}

template <class T>
std::vector<T> json_list(const json& v, const char* key) {
  if (v.is_number_integer()) return {static_cast<T>(v.get<long long>())};
  if (!v.is_array()) throw ConfigError(std::string("config key ") + key + " must be an integer or array");
  std::vector<T> out;
  for (const auto& x : v) {
    if (!x.is_number_integer()) throw ConfigError(std::string("config key ") + key + " must hold integers");
    out.push_back(static_cast<T>(x.get<long long>()));
  }
  return out;
}

void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config file is not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, v] : doc.items()) {
    try {
      if (key == "matrix") cfg.matrix = json_list<i64>(v, "matrix");
      else if (key == "p") cfg.ps = json_list<i64>(v, "p");
      else if (key == "k") cfg.ks = json_list<int>(v, "k");
      else if (key == "nu") cfg.nus = json_list<i64>(v, "nu");
      else if (key == "obs") cfg.obs = v.get<std::string>();
      else if (key == "seed") cfg.seed = v.get<u64>();
      else if (key == "out") cfg.out = v.get<std::string>();
      else if (key == "format") cfg.format = v.get<std::string>();
      else if (key == "jobs") cfg.jobs = v.get<int>();
      else if (key == "samples") cfg.samples = v.get<std::size_t>();
      else if (key == "real") cfg.real = v.get<bool>();
      else throw ConfigError("unknown config key " + key);
    } catch (const json::exception& e) {
      throw ConfigError("config key " + key + ": " + e.what());
    }
  }
}

RunConfig resolve(const CLI::App& sub, const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) apply_config_file(f.config, cfg);
  auto given = [&](const char* name) { return sub.count(name) > 0; };
  if (given("--matrix")) cfg.matrix = parse_list<i64>(f.matrix, "matrix");
  if (given("--p")) cfg.ps = parse_list<i64>(f.p, "p");
  if (given("--k")) cfg.ks = parse_list<int>(f.k, "k");
  if (given("--nu")) cfg.nus = parse_list<i64>(f.nu, "nu");
  if (given("--obs")) cfg.obs = f.obs;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--out")) cfg.out = f.out;
  if (given("--format")) cfg.format = f.format;
  if (given("--jobs")) cfg.jobs = f.jobs;
  if (given("--samples")) cfg.samples = f.samples;
  if (given("--real")) cfg.real = f.real;
  if (cfg.matrix.size() != 4) throw ConfigError("--matrix needs four integers a,b,c,d");
  if (cfg.jobs < 1) throw ConfigError("--jobs must be positive");
  return cfg;
}

TorusAutomorphism automorphism_of(const RunConfig& cfg) {
  return TorusAutomorphism(cfg.matrix[0], cfg.matrix[1], cfg.matrix[2], cfg.matrix[3]);
}

/// Single (p, k) for the sweep subcommands.
PrimePower single_prime_power(const RunConfig& cfg) {
  if (cfg.ps.size() != 1 || cfg.ks.size() != 1) throw ConfigError("--p and --k must each name one value");
  return PrimePower(cfg.ps.front(), cfg.ks.front());
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::string kind_name(PrimeKind kind) { return kind == PrimeKind::Split ? "split" : "inert"; }

int run_verify_case(const TorusAutomorphism& a, const PrimePower& pp, std::vector<suites::Check>& table) {
  std::ostringstream tag;
  tag << pp.p() << '^' << pp.k();
  suites::Recorder rec(tag.str());
  try {
    suites::modarith_suite(pp, rec);
    suites::quantization_suite(a, pp, rec);
    const HeckeGroup group = build_group(a, pp);
    const EigenDecomposition dec = eigendecompose(group);
    suites::hecke_suite(group, dec, rec);
    const ExpSumContext ctx(group);
    suites::expsum_suite(ctx, rec);
    const Theorem1Report t1 = suites::theorem1_suite(ctx, dec, rec);
    suites::slow_decay_suite(ctx, dec, t1, rec);
    suites::distribution_suite(ctx, dec, t1.sign == 0 ? 1 : t1.sign, rec);
  } catch (const Error& e) {
    rec.add("error", "run aborted", false, e.what());
  }
  table.insert(table.end(), rec.checks().begin(), rec.checks().end());
  return rec.all_pass() ? kExitOk : kExitFail;
}

int cmd_verify(const RunConfig& cfg) {
  const TorusAutomorphism a = automorphism_of(cfg);
  const bool default_primes = cfg.ps.empty();
  const std::vector<i64> ps = default_primes ? std::vector<i64>{3, 5, 7, 11, 13} : cfg.ps;
  const std::vector<int> ks = cfg.ks.empty() ? std::vector<int>{1, 2, 3} : cfg.ks;
  std::vector<i64> usable;
  for (i64 p : ps) {
    try {
      classify_prime(a, p);
    } catch (const Error& e) {
      if (default_primes && e.kind() == ErrorKind::Ramified) {
        std::cerr << "warning: skipping ramified p = " << p << '\n';
        continue;
      }
      throw;
    }
    usable.push_back(p);
  }
  for (int k : ks) {
    if (k < 1) throw ConfigError("--k must be positive");
  }
  for (i64 p : usable) {
    for (int k : ks) {
      const PrimePower pp(p, k);
      if (pp.modulus() > kDenseLimit) throw ConfigError("N = " + std::to_string(pp.modulus()) + " exceeds the dense limit");
    }
  }

  Output out(cfg.out);
  std::vector<suites::Check> table;
  int status = kExitOk;
  for (i64 p : usable) {
    for (int k : ks) status = std::max(status, run_verify_case(a, PrimePower(p, k), table));
  }
  std::size_t width = 0;
  for (const auto& c : table) width = std::max(width, c.suite.size() + c.name.size() + 3);
  std::ostream& os = out.stream();
  for (const auto& c : table) {
    std::string label = "[" + c.suite + "] " + c.name;
    label.resize(width, ' ');
    os << (c.pass ? "PASS  " : "FAIL  ") << label;
    if (!c.detail.empty()) os << "  " << c.detail;
    os << '\n';
  }
  os << (status == kExitOk ? "all checks passed" : "some checks failed") << '\n';
  return status;
}

int cmd_expsum(const RunConfig& cfg) {
  const TorusAutomorphism a = automorphism_of(cfg);
  const PrimePower pp = single_prime_power(cfg);
  const std::string format = cfg.format.empty() ? "csv" : cfg.format;
  if (format != "csv" && format != "json") throw ConfigError("--format must be csv or json");
  if (pp.k() < 2) fail(ErrorKind::KTooSmall, "expsum needs k >= 2");
  for (i64 nu : cfg.nus) {
    if (!pp.is_unit(nu)) fail(ErrorKind::NonUnitNu, "nu = " + std::to_string(nu) + " is not a unit mod p");
  }
  const HeckeGroup group = build_group(a, pp);
  const ExpSumContext ctx(group);
  const auto records = scan_characters(ctx, cfg.nus, cfg.jobs);

  std::ostringstream buf;
  if (format == "csv") {
    io::write_expsum_csv(buf, records);
  } else {
    json arr = json::array();
    for (const auto& r : records) {
      json j;
      j["p"] = r.p;
      j["k"] = r.k;
      j["nu"] = r.nu;
      j["chi_index"] = r.chi_index;
      j["re"] = std::stod(io::format_number(r.value.real()));
      j["im"] = std::stod(io::format_number(r.value.imag()));
      j["theta"] = r.theta ? json(*r.theta) : json(nullptr);
      j["good"] = r.good;
      j["vanished"] = r.vanished;
      arr.push_back(j);
    }
    buf << arr.dump(1) << '\n';
  }
  Output out(cfg.out);
  out.stream() << buf.str();
  return kExitOk;
}

/// Characters attached to the reported eigenfunctions that are bad for some frequency of f.
i64 count_bad(const ExpSumContext& ctx, const TwistedSpectrum& spectrum, const std::vector<i64>& chis) {
  if (ctx.prime_power().k() < 2) return 0;
  i64 bad = 0;
  for (i64 j : chis) {
    for (const auto& [nu, v] : spectrum) {
      if (std::abs(v) > 0.0 && !is_good(ctx, nu, j)) {
        ++bad;
        break;
      }
    }
  }
  return bad;
}

int cmd_distribution(const RunConfig& cfg) {
  const TorusAutomorphism a = automorphism_of(cfg);
  const PrimePower pp = single_prime_power(cfg);
  if (cfg.obs.empty()) throw ConfigError("--obs is required");
  if (!cfg.format.empty() && cfg.format != "json") throw ConfigError("distribution reports are JSON only");
  const FourierObservable f = io::load_observable(cfg.obs, cfg.real);
  if (!f.is_real()) fail(ErrorKind::Schema, "observable is not real-valued");
  const PrimeKind kind = classify_prime(a, pp.p());
  const bool dense = pp.modulus() <= kDenseLimit;
  if (!dense && (kind != PrimeKind::Split || pp.k() < 2))
    fail(ErrorKind::TooLarge, "N above the dense limit needs a split prime and k >= 2");
  const TwistedSpectrum spectrum = twisted_coefficients(f, a);
  require_unit_spectrum(spectrum, pp);

  const HeckeGroup group = build_group(a, pp);
  const ExpSumContext ctx(group);
  io::DistributionReport rep;
  rep.p = pp.p();
  rep.k = pp.k();
  rep.kind = kind_name(kind);
  rep.observable_digest = io::observable_digest(f);

  NormalizedElements elems;
  std::vector<i64> chis;
  if (dense) {
    const EigenDecomposition dec = eigendecompose(group);
    Theorem1Report t1 = theorem1_verify(ctx, dec, choose_n_list(a, pp.p()));
    rep.sign = t1.sign;
    rep.matched_unique = t1.matched_unique;
    elems = normalized_elements(f, a, dec);
    for (i64 label : elems.labels) {
      const auto it = std::find_if(t1.matches.begin(), t1.matches.end(), [&](const auto& m) { return m.first == label; });
      if (it != t1.matches.end()) chis.push_back(it->second);
    }
    rep.route = "eigenvectors";
  } else {
    rep.sign = 1;
    rep.matched_unique = false;
    elems = normalized_elements_closed(f, a, ctx, rep.sign);
    chis = elems.labels;
    rep.route = "closed-form";
  }
  if (elems.max_imag > 1e-6) fail(ErrorKind::Internal, "normalized matrix elements are not real");
  rep.n_eigenfunctions = static_cast<i64>(elems.set.size());
  rep.n_excluded_multiplicity = elems.excluded_multiplicity;
  rep.n_bad_character = count_bad(ctx, spectrum, chis);

  DistributionComparison cmp;
  if (spectrum.size() == 1) {
    cmp = compare_distribution_mu(elems.set, spectrum.begin()->second.real(), pp.p());
  } else {
    cmp = compare_distribution(elems.set, sample_Yf(spectrum, cfg.seed, cfg.samples), pp.p());
  }
  rep.ks = cmp.ks;
  rep.moments = cmp.left.moments;
  rep.model_moments = cmp.right.moments;
  rep.winsorized = cmp.left.winsorized;

  const std::string text = io::to_json(rep).dump(2) + "\n";
  Output out(cfg.out);
  out.stream() << text;
  return kExitOk;
}

bool is_config_kind(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Internal:
    case ErrorKind::ClusterMismatch:
    case ErrorKind::NoMatch:
      return false;
    default:
      return true;
  }
}

void add_common(CLI::App& sub, Flags& f) {
  sub.add_option("--matrix", f.matrix, "A as a,b,c,d (row-major)");
  sub.add_option("--p", f.p, "prime, or comma list for verify");
  sub.add_option("--k", f.k, "exponent, or comma list for verify");
  sub.add_option("--nu", f.nu, "comma list of frequencies");
  sub.add_option("--obs", f.obs, "observable JSON file");
  sub.add_option("--seed", f.seed, "sampler seed");
  sub.add_option("--out", f.out, "output path (default stdout)");
  sub.add_option("--format", f.format, "csv or json");
  sub.add_option("--jobs", f.jobs, "worker threads");
  sub.add_option("--samples", f.samples, "model sample count");
  sub.add_flag("--real", f.real, "reject observables that are not real-valued");
  sub.add_option("--config", f.config, "JSON config file; flags win");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized cat map modulo prime powers"};
  app.require_subcommand(1);
  Flags flags;
  CLI::App* verify = app.add_subcommand("verify", "run every self-check and print a pass/fail table");
  CLI::App* expsum = app.add_subcommand("expsum", "scan E(nu, chi) over all characters to CSV");
  CLI::App* distribution = app.add_subcommand("distribution", "normalized matrix elements vs the limiting model");
  for (CLI::App* sub : {verify, expsum, distribution}) add_common(*sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (verify->parsed()) return cmd_verify(resolve(*verify, flags));
    if (expsum->parsed()) return cmd_expsum(resolve(*expsum, flags));
    return cmd_distribution(resolve(*distribution, flags));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return is_config_kind(e.kind()) ? kExitConfig : kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}
