#pragma once

// JSON system documents:
//
//   {
//     "coefficients": [[c11, c12, c13], [c21, c22, c23]],
//     "x0": [x1, x2],                                  (optional)
//     "lift": {"zbar": [z1, z2], "eta": eta},          (optional)
//     "tolerances": {"eq_tol": .., "sing_tol": .., "oracle_tol": ..}  (optional)
//   }
//
// Every complex number is a [re, im] pair; a bare number is read as real.

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "quadsolve/extensions.hpp"
#include "quadsolve/numerics.hpp"
#include "quadsolve/transform.hpp"

namespace quadsolve::cli {

using json = nlohmann::json;

/// Malformed input; maps to the usage exit code.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpecDocument {
  QuadraticSystem sys;
  std::optional<Point> x0;
  std::optional<LiftParams> lift;
  Tolerances tol;
};

inline double finite_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw SpecError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SpecError(where + ": number is not finite");
  return v;
}

inline Complex complex_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return {finite_number(j, where), 0.0};
  if (!j.is_array() || j.size() != 2) throw SpecError(where + ": expected [re, im]");
  return {finite_number(j[0], where + "[0]"), finite_number(j[1], where + "[1]")};
}

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline Point point_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw SpecError(where + ": expected two complex entries");
  return {complex_from_json(j[0], where + "[0]"), complex_from_json(j[1], where + "[1]")};
}

inline json point_to_json(const Point& p) { return json::array({complex_to_json(p[0]), complex_to_json(p[1])}); }

inline json coefficients_to_json(const Coefficients& c) {
  json rows = json::array();
  for (const auto& row : c) {
    json r = json::array();
    for (const auto& v : row) r.push_back(complex_to_json(v));
    rows.push_back(r);
  }
  return rows;
}

inline SpecDocument spec_from_json(const json& j) {
  if (!j.is_object()) throw SpecError("document must be a JSON object");
  if (!j.contains("coefficients")) throw SpecError("missing \"coefficients\"");
  const auto& c = j.at("coefficients");
  if (!c.is_array() || c.size() != 2) throw SpecError("coefficients: expected 2 rows");
  SpecDocument doc;
  for (std::size_t n = 0; n < 2; ++n) {
    if (!c[n].is_array() || c[n].size() != 3) throw SpecError("coefficients: each row needs 3 entries");
    for (std::size_t l = 0; l < 3; ++l) {
      doc.sys.c[n][l] =
          complex_from_json(c[n][l], "coefficients[" + std::to_string(n) + "][" + std::to_string(l) + "]");
    }
  }
  if (j.contains("x0") && !j.at("x0").is_null()) doc.x0 = point_from_json(j.at("x0"), "x0");
  if (j.contains("lift") && !j.at("lift").is_null()) {
    const auto& l = j.at("lift");
    if (!l.is_object()) throw SpecError("lift: expected an object");
    LiftParams p;
    if (l.contains("zbar")) p.zbar = point_from_json(l.at("zbar"), "lift.zbar");
    if (l.contains("eta")) p.eta = complex_from_json(l.at("eta"), "lift.eta");
    doc.lift = p;
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    if (!t.is_object()) throw SpecError("tolerances: expected an object");
    if (t.contains("eq_tol")) doc.tol.eq_tol = finite_number(t.at("eq_tol"), "tolerances.eq_tol");
    if (t.contains("sing_tol")) doc.tol.sing_tol = finite_number(t.at("sing_tol"), "tolerances.sing_tol");
    if (t.contains("oracle_tol")) doc.tol.oracle_tol = finite_number(t.at("oracle_tol"), "tolerances.oracle_tol");
    try {
      doc.tol.validate();
    } catch (const Error& e) {
      throw SpecError(e.what());
    }
  }
  return doc;
}

inline json spec_to_json(const SpecDocument& doc) {
  json j;
  j["coefficients"] = coefficients_to_json(doc.sys.c);
  if (doc.x0) j["x0"] = point_to_json(*doc.x0);
  if (doc.lift) j["lift"] = {{"zbar", point_to_json(doc.lift->zbar)}, {"eta", complex_to_json(doc.lift->eta)}};
  return j;
}

inline SpecDocument parse_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("malformed JSON: ") + e.what());
  }
  return spec_from_json(j);
}

inline SpecDocument load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

/// Parses "re" or "re,im", where each part may be a fraction "p/q".
inline Complex parse_complex(const std::string& text) {
  auto real_part = [&](const std::string& s) {
    const auto slash = s.find('/');
    try {
      std::size_t used = 0;
      if (slash == std::string::npos) {
        const double v = std::stod(s, &used);
        if (used != s.size()) throw SpecError("unparsed trailing characters");
        return v;
      }
      const std::string num = s.substr(0, slash), den = s.substr(slash + 1);
      std::size_t u1 = 0, u2 = 0;
      const double p = std::stod(num, &u1), q = std::stod(den, &u2);
      if (u1 != num.size() || u2 != den.size() || q == 0.0) throw SpecError("bad fraction");
      return p / q;
    } catch (const std::logic_error&) {
      throw SpecError("cannot parse number \"" + s + "\"");
    } catch (const SpecError&) {
      throw SpecError("cannot parse number \"" + s + "\"");
    }
  };
  const auto comma = text.find(',');
  if (comma == std::string::npos) return {real_part(text), 0.0};
  return {real_part(text.substr(0, comma)), real_part(text.substr(comma + 1))};
}

}  // namespace quadsolve::cli
