#include "gridsens/case_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "gridsens/errors.hpp"

namespace gridsens {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Row {
  int line = 0;
  std::vector<double> values;
};

struct Table {
  int line = 0;
  std::vector<Row> rows;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\'') quoted = !quoted;
    if (line[i] == '%' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) return false;
  }
  return true;
}

std::optional<double> parse_number(std::string_view token) {
  std::string_view body = token;
  double sign = 1.0;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    if (body.front() == '-') sign = -1.0;
    body.remove_prefix(1);
  }
  if (iequals(body, "inf")) return sign * std::numeric_limits<double>::infinity();
  if (iequals(body, "nan")) return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc{} || ptr != body.data() + body.size() || body.empty()) return std::nullopt;
  return sign * value;
}

class MatpowerReader {
 public:
  explicit MatpowerReader(std::string_view text) : text_(text) {}

  void run() {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      std::size_t end = text_.find('\n', pos);
      if (end == std::string_view::npos) end = text_.size();
      ++line_no;
      handle_line(strip_comment(text_.substr(pos, end - pos)), line_no);
      pos = end + 1;
    }
    if (open_table_) throw ParseError("unterminated matrix mpc." + open_name_, tables_[open_name_].line);
    if (in_cell_) throw ParseError("unterminated cell array", cell_line_);
  }

  const std::map<std::string, Table>& tables() const { return tables_; }
  const std::map<std::string, std::pair<double, int>>& scalars() const { return scalars_; }
  const std::string& function_name() const { return function_name_; }

 private:
  void handle_line(std::string_view line, int line_no) {
    line = trim(line);
    if (in_cell_) {
      if (line.find('}') != std::string_view::npos) in_cell_ = false;
      return;
    }
    if (open_table_) {
      consume_matrix_text(line, line_no);
      return;
    }
    if (line.empty()) return;

    if (line.starts_with("function")) {
      auto eq = line.find('=');
      if (eq != std::string_view::npos) function_name_ = std::string(trim(line.substr(eq + 1)));
      return;
    }
    if (line == "end" || line == "return" || line == "end;" || line == "return;") return;
    if (!line.starts_with("mpc.")) throw ParseError("unexpected statement '" + std::string(line) + "'", line_no);

    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected '=' in assignment", line_no);
    std::string name(trim(line.substr(4, eq - 4)));
    std::string_view rhs = trim(line.substr(eq + 1));
    if (name.empty()) throw ParseError("missing field name", line_no);

    if (rhs.starts_with("[")) {
      open_table_ = true;
      open_name_ = name;
      tables_[name] = Table{line_no, {}};
      consume_matrix_text(rhs.substr(1), line_no);
    } else if (rhs.starts_with("{")) {
      if (rhs.find('}') == std::string_view::npos) {
        in_cell_ = true;
        cell_line_ = line_no;
      }
    } else if (rhs.starts_with("'")) {
      // string field such as mpc.version
    } else {
      std::string_view value = rhs;
      if (value.ends_with(";")) value.remove_suffix(1);
      auto number = parse_number(trim(value));
      if (!number) throw ParseError("invalid value for mpc." + name + ": '" + std::string(value) + "'", line_no);
      scalars_[name] = {*number, line_no};
    }
  }

  void consume_matrix_text(std::string_view text, int line_no) {
    Table& table = tables_[open_name_];
    std::size_t i = 0;
    while (i < text.size()) {
      const char c = text[i];
      if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
        ++i;
        continue;
      }
      if (c == ';') {
        finish_row(table);
        ++i;
        continue;
      }
      if (c == ']') {
        finish_row(table);
        open_table_ = false;
        std::string_view rest = trim(text.substr(i + 1));
        if (!rest.empty() && rest != ";") {
          throw ParseError("unexpected text after matrix: '" + std::string(rest) + "'", line_no);
        }
        return;
      }
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != ',' &&
             text[j] != ';' && text[j] != ']') {
        ++j;
      }
      std::string_view token = text.substr(i, j - i);
      auto number = parse_number(token);
      if (!number) throw ParseError("invalid number '" + std::string(token) + "' in mpc." + open_name_, line_no);
      if (current_.values.empty()) current_.line = line_no;
      current_.values.push_back(*number);
      i = j;
    }
    // A line break also ends a row in MATLAB matrix syntax.
    finish_row(table);
  }

  void finish_row(Table& table) {
    if (!current_.values.empty()) table.rows.push_back(std::move(current_));
    current_ = Row{};
  }

  std::string_view text_;
  std::map<std::string, Table> tables_;
  std::map<std::string, std::pair<double, int>> scalars_;
  std::string function_name_;
  bool open_table_ = false;
  std::string open_name_;
  bool in_cell_ = false;
  int cell_line_ = 0;
  Row current_;
};

const Table& require_table(const MatpowerReader& reader, const std::string& name, std::size_t min_columns) {
  auto it = reader.tables().find(name);
  if (it == reader.tables().end()) throw ParseError("missing mpc." + name, 0);
  for (const Row& row : it->second.rows) {
    if (row.values.size() < min_columns) {
      throw ParseError("mpc." + name + " row needs at least " + std::to_string(min_columns) + " columns, found " +
                           std::to_string(row.values.size()),
                       row.line);
    }
    if (row.values.size() != it->second.rows.front().values.size()) {
      throw ParseError("inconsistent column count in mpc." + name, row.line);
    }
  }
  return it->second;
}

int as_int(double value, int line, const char* what) {
  if (!std::isfinite(value) || value != std::round(value)) {
    throw ParseError(std::string(what) + " must be an integer", line);
  }
  return static_cast<int>(value);
}

/// Finds a decimal literal y with decode(y) == target, starting near `guess`.
template <class Decode>
std::string encode_exact(double target, double guess, Decode decode) {
  char buf[64];
  auto render = [&](double y) {
    std::snprintf(buf, sizeof buf, "%.17g", y);
    return std::string(buf);
  };
  if (!std::isfinite(target)) return target > 0 ? "Inf" : (target < 0 ? "-Inf" : "NaN");
  if (decode(guess) == target) return render(guess);
  double up = guess;
  double down = guess;
  for (int step = 0; step < 64; ++step) {
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    down = std::nextafter(down, -std::numeric_limits<double>::infinity());
    if (decode(up) == target) return render(up);
    if (decode(down) == target) return render(down);
  }
  return render(guess);
}

}  // namespace

GridCase parse_case(std::string_view text, std::string name) {
  MatpowerReader reader(text);
  reader.run();

  auto base_it = reader.scalars().find("baseMVA");
  if (base_it == reader.scalars().end()) throw ParseError("missing mpc.baseMVA", 0);
  const double base = base_it->second.first;
  if (!(base > 0.0)) throw ParseError("mpc.baseMVA must be positive", base_it->second.second);

  const Table& bus_table = require_table(reader, "bus", 9);
  const Table& gen_table = require_table(reader, "gen", 8);
  const Table& branch_table = require_table(reader, "branch", 11);

  std::vector<Generator> generators;
  generators.reserve(gen_table.rows.size());
  std::map<int, int> active_gens;
  for (const Row& row : gen_table.rows) {
    const auto& v = row.values;
    Generator gen;
    gen.bus = as_int(v[0], row.line, "generator bus");
    gen.p_set = v[1] / base;
    gen.q_set = v[2] / base;
    gen.q_max = v[3] / base;
    gen.q_min = v[4] / base;
    gen.v_set = v[5];
    gen.in_service = v[7] > 0.0;
    if (gen.in_service) ++active_gens[gen.bus];
    generators.push_back(gen);
  }

  std::vector<Bus> buses;
  buses.reserve(bus_table.rows.size());
  for (const Row& row : bus_table.rows) {
    const auto& v = row.values;
    Bus bus;
    bus.id = as_int(v[0], row.line, "bus id");
    switch (as_int(v[1], row.line, "bus type")) {
      case 1: bus.kind = BusKind::PQ; break;
      case 2: bus.kind = active_gens.contains(bus.id) ? BusKind::PV : BusKind::PQ; break;
      case 3: bus.kind = BusKind::Slack; break;
      case 4: throw ParseError("isolated buses (type 4) are not supported", row.line);
      default: throw ParseError("unknown bus type", row.line);
    }
    bus.p_load = v[2] / base;
    bus.q_load = v[3] / base;
    bus.g_shunt = v[4] / base;
    bus.b_shunt = v[5] / base;
    bus.v_init = v[7];
    bus.theta_init = v[8] * kDegToRad;
    if (!(bus.v_init > 0.0)) throw ParseError("bus voltage magnitude must be positive", row.line);
    buses.push_back(bus);
  }

  std::vector<Branch> branches;
  branches.reserve(branch_table.rows.size());
  for (const Row& row : branch_table.rows) {
    const auto& v = row.values;
    Branch br;
    br.from_bus = as_int(v[0], row.line, "branch from bus");
    br.to_bus = as_int(v[1], row.line, "branch to bus");
    br.r = v[2];
    br.x = v[3];
    br.b_charging = v[4];
    br.tap = v[8] == 0.0 ? 1.0 : v[8];
    br.shift = v[9] * kDegToRad;
    br.status = v[10] > 0.0 ? BranchStatus::Closed : BranchStatus::Open;
    branches.push_back(br);
  }

  if (name.empty()) name = reader.function_name();
  return GridCase(base, std::move(buses), std::move(branches), std::move(generators), std::move(name));
}

GridCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open case file '" + path.string() + "': file not found or unreadable");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_case(buffer.str(), path.stem().string());
}

std::string to_matpower(const GridCase& grid) {
  const double base = grid.base_mva();
  auto mw = [base](double pu) { return encode_exact(pu, pu * base, [base](double y) { return y / base; }); };
  auto deg = [](double rad) {
    return encode_exact(rad, rad / kDegToRad, [](double y) { return y * kDegToRad; });
  };
  auto plain = [](double value) { return encode_exact(value, value, [](double y) { return y; }); };

  std::ostringstream out;
  out << "function mpc = " << (grid.name().empty() ? "gridcase" : grid.name()) << "\n";
  out << "mpc.version = '2';\n";
  out << "mpc.baseMVA = " << plain(base) << ";\n\n";

  out << "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n";
  out << "mpc.bus = [\n";
  for (const Bus& bus : grid.buses()) {
    const int type = bus.kind == BusKind::Slack ? 3 : (bus.kind == BusKind::PV ? 2 : 1);
    out << '\t' << bus.id << '\t' << type << '\t' << mw(bus.p_load) << '\t' << mw(bus.q_load) << '\t'
        << mw(bus.g_shunt) << '\t' << mw(bus.b_shunt) << "\t1\t" << plain(bus.v_init) << '\t'
        << deg(bus.theta_init) << "\t0\t1\t1.1\t0.9;\n";
  }
  out << "];\n\n";

  out << "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n";
  out << "mpc.gen = [\n";
  for (const Generator& gen : grid.generators()) {
    out << '\t' << gen.bus << '\t' << mw(gen.p_set) << '\t' << mw(gen.q_set) << '\t' << mw(gen.q_max) << '\t'
        << mw(gen.q_min) << '\t' << plain(gen.v_set) << '\t' << plain(base) << '\t' << (gen.in_service ? 1 : 0)
        << "\t0\t0;\n";
  }
  out << "];\n\n";

  out << "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n";
  out << "mpc.branch = [\n";
  for (const Branch& br : grid.branches()) {
    out << '\t' << br.from_bus << '\t' << br.to_bus << '\t' << plain(br.r) << '\t' << plain(br.x) << '\t'
        << plain(br.b_charging) << "\t0\t0\t0\t" << plain(br.tap) << '\t' << deg(br.shift) << '\t'
        << (br.closed() ? 1 : 0) << "\t-360\t360;\n";
  }
  out << "];\n";
  return out.str();
}

}  // namespace gridsens
