#pragma once

#include "lindstab/common.hpp"
#include "lindstab/glauber.hpp"
#include "lindstab/lattice.hpp"
#include "lindstab/model.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace lindstab {

using json = nlohmann::json;

// Malformed input: `field` is a JSON pointer to the offending value, `line` is set for
// parse errors.
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& what, std::string field = "", int line = 0)
      : std::runtime_error(what), field(std::move(field)), line(line) {}
  std::string field;
  int line;
};

// 17 significant digits, '.' decimal; round-trips every double.
std::string format_double(double x);

using Cell = std::variant<double, long long, std::string>;

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add(std::vector<Cell> row);
  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }
  void write(std::ostream& os) const;
  std::string str() const;
  // {"header": [...], "rows": [[...]]}; non-finite doubles become strings.
  json to_json() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

// {"dim": D, "extent": [...], "periodic": [...]}
void to_json(json& j, const Geometry& g);
void from_json(const json& j, Geometry& g);
// sorted coordinate arrays
void to_json(json& j, const Region& r);
void from_json(const json& j, Region& r);
// {"kind": "finite_range"|"exponential"|"quasi_local"|"power", "param": x}
void to_json(json& j, const DecayProfile& p);
void from_json(const json& j, DecayProfile& p);
// {"range": r, "terms": [{"sites": [...], "table": [...]}], "ti": bool}
void to_json(json& j, const Potential& p);
void from_json(const json& j, Potential& p);

// Small matrices as {"re": [[...]], "im": [[...]]}, row-major; "im" may be omitted.
json matrix_to_json(const Mat& M);
Mat matrix_from_json(const json& j);

// Family description. Named families: "amplitude-damping", "dephasing" ({"gamma"}),
// "four-level", "random-nn" (seeded on-site and bond GKLS terms on a chain). Inline
// families give {"local_dim", "terms": [{"offsets": [[...]], "hamiltonian": M,
// "jumps": [M, ...]}]} placed at every site.
UniformFamily family_from_json(const json& j, std::uint64_t seed);
UniformFamily random_nn_family(std::uint64_t seed, double scale = 1.0);

// {"family": name|{inline}, "geometry": ..., "boundary": "open"|"periodic",
//  "region": [...] (optional, defaults to the whole geometry),
//  "perturbation": {"epsilon": ε, "terms": [...inline terms]}}
Model model_from_json(const json& j, std::uint64_t seed);

// Parses text, converting parse errors to ConfigError with the line number.
json parse_json(const std::string& text);

}  // namespace lindstab
