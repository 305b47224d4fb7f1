#include "lindstab/io.hpp"

#include "lindstab/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace lindstab {

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'", where + "/" + key);
  return j.at(key);
}

template <class T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value: ") + e.what(), where);
  }
}

Mat gaussian_matrix(Index n, Rng& rng) {
  std::normal_distribution<double> g;
  Mat M(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) M(i, j) = cplx(g(rng), g(rng));
  return M;
}

UniformFamily sitewise(std::string name, const SuperOp& local, int d) {
  UniformFamily f;
  f.name = std::move(name);
  f.local_dim = d;
  f.profile = DecayProfile::finite_range(0);
  f.bulk = [local](const Site& u) { return std::vector<LocalTerm>{{u, 0, {u}, local, false}}; };
  return f;
}

struct InlineTerm {
  std::vector<Site> offsets;
  SuperOp generator;
  int radius = 0;
};

std::vector<InlineTerm> inline_terms(const json& arr, int d, const std::string& where) {
  if (!arr.is_array()) throw ConfigError("terms must be an array", where);
  std::vector<InlineTerm> out;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string w = where + "/" + std::to_string(k);
    const json& t = arr[k];
    InlineTerm it;
    it.offsets = get_as<std::vector<Site>>(need(t, "offsets", w), w + "/offsets");
    if (it.offsets.empty()) throw ConfigError("a term needs at least one site", w + "/offsets");
    Index dim = 1;
    for (const Site& o : it.offsets) {
      dim *= d;
      for (int c : o) it.radius = std::max(it.radius, std::abs(c));
    }
    Mat H = Mat::Zero(dim, dim);
    std::vector<Mat> jumps;
    try {
      if (t.contains("hamiltonian")) H = matrix_from_json(t["hamiltonian"]);
      if (t.contains("jumps"))
        for (const json& m : t["jumps"]) jumps.push_back(matrix_from_json(m));
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), w);
    }
    bool ok = H.rows() == dim && H.cols() == dim;
    for (const Mat& L : jumps) ok = ok && L.rows() == dim && L.cols() == dim;
    if (!ok) throw ConfigError("term matrices must match (local_dim)^|offsets|", w);
    try {
      it.generator = from_gkls(H, jumps);
    } catch (const DomainError& e) {
      throw ConfigError(e.what(), w + "/hamiltonian");
    }
    out.push_back(std::move(it));
  }
  return out;
}

std::vector<LocalTerm> place(const std::vector<InlineTerm>& terms, const Site& u, bool perturbation) {
  std::vector<LocalTerm> out;
  for (const InlineTerm& t : terms) {
    std::vector<Site> supp;
    for (const Site& o : t.offsets) {
      Site x = u;
      for (std::size_t a = 0; a < x.size() && a < o.size(); ++a) x[a] += o[a];
      supp.push_back(x);
    }
    out.push_back({u, t.radius, supp, t.generator, perturbation});
  }
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw DomainError("CSV header must not be empty");
}

void CsvTable::add(std::vector<Cell> row) {
  if (row.size() != header_.size()) throw DomainError("CSV row width does not match the header");
  rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& os) const {
  for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << csv_escape(header_[i]);
  os << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      if (const double* d = std::get_if<double>(&row[i])) os << format_double(*d);
      else if (const long long* n = std::get_if<long long>(&row[i])) os << *n;
      else os << csv_escape(std::get<std::string>(row[i]));
    }
    os << '\n';
  }
}

std::string CsvTable::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

json CsvTable::to_json() const {
  json rows = json::array();
  for (const auto& row : rows_) {
    json r = json::array();
    for (const Cell& c : row) {
      if (const double* d = std::get_if<double>(&c)) r.push_back(std::isfinite(*d) ? json(*d) : json(format_double(*d)));
      else if (const long long* n = std::get_if<long long>(&c)) r.push_back(*n);
      else r.push_back(std::get<std::string>(c));
    }
    rows.push_back(std::move(r));
  }
  return json{{"header", header_}, {"rows", rows}};
}

void to_json(json& j, const Geometry& g) {
  j = json{{"dim", g.dim}, {"extent", g.extent}, {"periodic", g.periodic}};
}

void from_json(const json& j, Geometry& g) {
  const auto extent = get_as<std::vector<int>>(need(j, "extent", ""), "/extent");
  std::vector<bool> periodic(extent.size(), false);
  if (j.contains("periodic")) {
    const json& p = j["periodic"];
    if (p.is_boolean()) std::fill(periodic.begin(), periodic.end(), p.get<bool>());
    else periodic = get_as<std::vector<bool>>(p, "/periodic");
  }
  if (j.contains("dim") && get_as<int>(j["dim"], "/dim") != int(extent.size()))
    throw ConfigError("dim does not match the extent", "/dim");
  try {
    g = Geometry(extent, periodic);
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), "/extent");
  }
}

void to_json(json& j, const Region& r) { j = r.sites(); }

void from_json(const json& j, Region& r) { r = Region(get_as<std::vector<Site>>(j, "")); }

void to_json(json& j, const DecayProfile& p) { j = json{{"kind", to_string(p.kind)}, {"param", p.param}}; }

void from_json(const json& j, DecayProfile& p) {
  const std::string kind = get_as<std::string>(need(j, "kind", ""), "/kind");
  const double param = get_as<double>(need(j, "param", ""), "/param");
  for (auto k : {DecayProfile::Kind::finite_range, DecayProfile::Kind::exponential,
                 DecayProfile::Kind::quasi_local, DecayProfile::Kind::power})
    if (to_string(k) == kind) {
      p = {k, param};
      return;
    }
  throw ConfigError("unknown decay profile '" + kind + "'", "/kind");
}

void to_json(json& j, const Potential& p) {
  json terms = json::array();
  for (const PotentialTerm& t : p.terms) terms.push_back({{"sites", t.sites}, {"table", t.table}});
  j = json{{"range", p.range}, {"terms", terms}, {"ti", p.translation_invariant}};
}

void from_json(const json& j, Potential& p) {
  p = Potential{};
  p.range = get_as<int>(need(j, "range", ""), "/range");
  if (j.contains("ti")) p.translation_invariant = get_as<bool>(j["ti"], "/ti");
  const json& terms = need(j, "terms", "");
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const std::string w = "/terms/" + std::to_string(k);
    PotentialTerm t;
    t.sites = get_as<std::vector<Site>>(need(terms[k], "sites", w), w + "/sites");
    t.table = get_as<std::vector<double>>(need(terms[k], "table", w), w + "/table");
    p.terms.push_back(std::move(t));
  }
  try {
    validate(p);
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), "/terms");
  }
}

json matrix_to_json(const Mat& M) {
  json re = json::array(), im = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    std::vector<double> r, c;
    for (Index k = 0; k < M.cols(); ++k) {
      r.push_back(M(i, k).real());
      c.push_back(M(i, k).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  return json{{"re", re}, {"im", im}};
}

Mat matrix_from_json(const json& j) {
  auto rows = [](const json& x, const std::string& w) {
    return get_as<std::vector<std::vector<double>>>(x, w);
  };
  const json& rj = j.is_object() ? need(j, "re", "") : j;
  const auto re = rows(rj, "/re");
  if (re.empty()) throw ConfigError("empty matrix", "/re");
  const std::size_t n = re.size(), m = re[0].size();
  for (const auto& r : re)
    if (r.size() != m) throw ConfigError("ragged matrix", "/re");
  Mat M(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) M(i, k) = re[i][k];
  if (j.is_object() && j.contains("im")) {
    const auto im = rows(j["im"], "/im");
    if (im.size() != n) throw ConfigError("imaginary part has the wrong shape", "/im");
    for (std::size_t i = 0; i < n; ++i) {
      if (im[i].size() != m) throw ConfigError("imaginary part has the wrong shape", "/im");
      for (std::size_t k = 0; k < m; ++k) M(i, k) += cplx(0, im[i][k]);
    }
  }
  return M;
}

UniformFamily random_nn_family(std::uint64_t seed, double scale) {
  Rng rng(seed);
  const Mat h_site = scale * hermitian_part(gaussian_matrix(2, rng));
  const Mat l_site = scale * 0.5 * gaussian_matrix(2, rng);
  const Mat h_bond = scale * 0.5 * hermitian_part(gaussian_matrix(4, rng));
  const Mat l_bond = scale * 0.3 * gaussian_matrix(4, rng);
  UniformFamily f;
  f.name = "random-nn";
  f.local_dim = 2;
  f.profile = DecayProfile::finite_range(1);
  const SuperOp site = from_gkls(h_site, {l_site});
  const SuperOp bond = from_gkls(h_bond, {l_bond});
  f.bulk = [site, bond](const Site& u) {
    Site v = u;
    v[0] += 1;
    return std::vector<LocalTerm>{{u, 0, {u}, site, false}, {u, 1, {u, v}, bond, false}};
  };
  return f;
}

UniformFamily family_from_json(const json& j, std::uint64_t seed) {
  const json desc = j.is_string() ? json{{"name", j}} : j;
  if (!desc.is_object()) throw ConfigError("family must be a name or an object", "/family");
  UniformFamily f;
  if (desc.contains("terms")) {
    const int d = desc.contains("local_dim") ? get_as<int>(desc["local_dim"], "/family/local_dim") : 2;
    if (d < 2) throw ConfigError("local_dim must be at least 2", "/family/local_dim");
    auto terms = inline_terms(desc["terms"], d, "/family/terms");
    int R = 0;
    for (const InlineTerm& t : terms) R = std::max(R, t.radius);
    f.name = desc.value("name", "inline");
    f.local_dim = d;
    f.profile = DecayProfile::finite_range(R);
    f.bulk = [terms](const Site& u) { return place(terms, u, false); };
  } else {
    const std::string name = get_as<std::string>(need(desc, "name", "/family"), "/family/name");
    if (name == "amplitude-damping") {
      const double eps = desc.value("epsilon", 0.0);
      f = sitewise(name, amplitude_damping(1, eps).perturbed.terms[0].generator, 2);
    } else if (name == "dephasing") {
      f = sitewise(name, schur_multiplier(hamming_dephasing_coeffs(1, desc.value("gamma", 1.0))), 2);
    } else if (name == "four-level") {
      f = sitewise(name, four_level_site(), 4);
    } else if (name == "random-nn") {
      f = random_nn_family(desc.value("seed", seed), desc.value("scale", 1.0));
    } else {
      throw ConfigError("unknown family '" + name + "'", "/family/name");
    }
  }
  if (desc.contains("J")) f.J = get_as<double>(desc["J"], "/family/J");
  if (desc.contains("profile")) f.profile = get_as<DecayProfile>(desc["profile"], "/family/profile");
  return f;
}

Model model_from_json(const json& j, std::uint64_t seed) {
  if (!j.is_object()) throw ConfigError("model must be an object", "");
  Geometry g;
  const json& jg = need(j, "geometry", "");
  try {
    g = jg.get<Geometry>();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), "/geometry" + e.field);
  }
  UniformFamily fam = family_from_json(need(j, "family", ""), seed);
  Region lambda = full_region(g);
  if (j.contains("region")) {
    lambda = get_as<Region>(j["region"], "/region");
    for (const Site& x : lambda)
      if (int(x.size()) != g.dim || !g.in_range(x)) throw ConfigError("region site outside the geometry", "/region");
  }
  const std::string boundary = j.value("boundary", "open");
  Model m;
  if (boundary == "open") {
    m = build_open(fam, g, lambda);
  } else if (boundary == "periodic") {
    fam.boundary = BoundaryRule::periodic;
    m = build_closed(fam, g, lambda);
  } else {
    throw ConfigError("boundary must be 'open' or 'periodic'", "/boundary");
  }
  if (j.contains("perturbation")) {
    const json& p = j["perturbation"];
    Perturbation pert;
    pert.epsilon = get_as<double>(need(p, "epsilon", "/perturbation"), "/perturbation/epsilon");
    const auto terms = inline_terms(need(p, "terms", "/perturbation"), fam.local_dim, "/perturbation/terms");
    int R = 0;
    for (const InlineTerm& t : terms) R = std::max(R, t.radius);
    pert.profile = DecayProfile::finite_range(R);
    for (const Site& u : lambda)
      for (LocalTerm& t : place(terms, u, true)) {
        bool inside = true;
        for (Site& x : t.support) {
          x = g.wrap(x);
          inside = inside && lambda.contains(x);
        }
        if (inside) pert.terms.push_back(std::move(t));
      }
    try {
      m = perturbed_model(m, pert);
    } catch (const ValidationError& e) {
      throw ConfigError(e.what(), "/perturbation/terms");
    }
  }
  return m;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(std::string("malformed JSON: ") + e.what(), "", line);
  }
}

}  // namespace lindstab
