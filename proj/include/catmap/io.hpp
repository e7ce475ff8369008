#pragma once

// File formats: observable JSON input, exponential-sum CSV, distribution report JSON.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "catmap/distribution.hpp"
#include "catmap/error.hpp"
#include "catmap/expsum.hpp"
#include "catmap/quantization.hpp"

namespace catmap::io {

using json = nlohmann::json;

/// Records {n1, n2, re, im}; duplicate n are summed.
inline FourierObservable parse_observable(const json& doc, bool require_real) {
  if (!doc.is_array()) fail(ErrorKind::Schema, "observable must be a JSON array");
  FourierObservable f;
  for (const auto& rec : doc) {
    if (!rec.is_object()) fail(ErrorKind::Schema, "observable record must be an object");
    for (const char* key : {"n1", "n2", "re", "im"}) {
      if (!rec.contains(key)) fail(ErrorKind::Schema, std::string("record is missing ") + key);
    }
    if (!rec["n1"].is_number_integer() || !rec["n2"].is_number_integer())
      fail(ErrorKind::Schema, "n1 and n2 must be integers");
    if (!rec["re"].is_number() || !rec["im"].is_number()) fail(ErrorKind::Schema, "re and im must be numbers");
    const double re = rec["re"].get<double>();
    const double im = rec["im"].get<double>();
    if (!std::isfinite(re) || !std::isfinite(im)) fail(ErrorKind::Schema, "coefficients must be finite");
    f.add({rec["n1"].get<i64>(), rec["n2"].get<i64>()}, {re, im});
  }
  if (require_real && !f.is_real()) fail(ErrorKind::Schema, "observable is not real-valued");
  return f;
}

inline FourierObservable load_observable(const std::string& path, bool require_real) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Schema, "cannot open observable file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Schema, std::string("observable file is not JSON: ") + e.what());
  }
  return parse_observable(doc, require_real);
}

/// Shortest round-trip decimal for a finite double.
inline std::string format_number(double x) {
  if (!std::isfinite(x)) fail(ErrorKind::Internal, "non-finite value in output");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// FNV-1a over the canonical coefficient listing.
inline std::string observable_digest(const FourierObservable& f) {
  std::ostringstream s;
  for (const auto& [n, v] : f.coefficients()) s << n.n1 << ',' << n.n2 << ',' << format_number(v.real()) << ',' << format_number(v.imag()) << ';';
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline constexpr const char* kExpSumHeader = "p,k,nu,chi_index,re,im,theta,good,vanished";

inline void write_expsum_csv(std::ostream& out, const std::vector<ExpSumRecord>& records) {
  out << kExpSumHeader << '\n';
  for (const auto& r : records) {
    out << r.p << ',' << r.k << ',' << r.nu << ',' << r.chi_index << ',' << format_number(r.value.real()) << ','
        << format_number(r.value.imag()) << ',' << (r.theta ? format_number(*r.theta) : std::string()) << ','
        << (r.good ? "true" : "false") << ',' << (r.vanished ? "true" : "false") << '\n';
  }
}

struct DistributionReport {
  i64 p = 0;
  int k = 0;
  std::string kind;
  std::string observable_digest;
  std::string route;
  i64 n_eigenfunctions = 0;
  i64 n_excluded_multiplicity = 0;
  i64 n_bad_character = 0;
  double ks = 0.0;
  std::vector<double> moments;
  std::vector<double> model_moments;
  i64 winsorized = 0;
  int sign = 1;
  bool matched_unique = false;
};

inline json to_json(const DistributionReport& r) {
  auto finite_list = [](const std::vector<double>& xs) {
    json a = json::array();
    for (double x : xs) {
      if (!std::isfinite(x)) fail(ErrorKind::Internal, "non-finite value in report");
      a.push_back(x);
    }
    return a;
  };
  if (!std::isfinite(r.ks)) fail(ErrorKind::Internal, "non-finite KS distance");
  json j;
  j["p"] = r.p;
  j["k"] = r.k;
  j["kind"] = r.kind;
  j["observable_digest"] = r.observable_digest;
  j["route"] = r.route;
  j["n_eigenfunctions"] = r.n_eigenfunctions;
  j["n_excluded_multiplicity"] = r.n_excluded_multiplicity;
  j["n_bad_character"] = r.n_bad_character;
  j["ks"] = r.ks;
  j["moments"] = finite_list(r.moments);
  j["model_moments"] = finite_list(r.model_moments);
  j["winsorized"] = r.winsorized;
  j["sign"] = r.sign;
  j["matched_unique"] = r.matched_unique;
  return j;
}

}  // namespace catmap::io
