#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "kadapt/milp.hpp"

namespace kadapt::milp {
namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool valid_name_char(char c, bool first) {
  if (std::isalpha(static_cast<unsigned char>(c))) return true;
  if (!first && std::isdigit(static_cast<unsigned char>(c))) return true;
  switch (c) {
    case '_':
    case '!':
    case '#':
    case '$':
    case '%':
    case '&':
    case '(':
    case ')':
    case '/':
    case ',':
    case ';':
    case '?':
    case '@':
    case '{':
    case '}':
    case '|':
    case '~':
      return true;
    case '.':
      return !first;
    default:
      return false;
  }
}

// Sanitized, unique names; falls back to x<j> / c<i>.
std::vector<std::string> make_names(std::size_t count, char prefix,
                                    const auto& original_name) {
  std::vector<std::string> names(count);
  std::set<std::string> used;
  for (std::size_t k = 0; k < count; ++k) {
    std::string name = original_name(k);
    for (std::size_t p = 0; p < name.size(); ++p) {
      if (!valid_name_char(name[p], p == 0)) name[p] = '_';
    }
    if (!name.empty() && !valid_name_char(name[0], true)) name.insert(0, "_");
    const bool reserved = name == "e" || name == "E" || name.empty() ||
                          name.size() > 200;
    if (reserved || used.contains(name)) {
      name = std::string(1, prefix) + std::to_string(k);
      while (used.contains(name)) name += "_";
    }
    used.insert(name);
    names[k] = std::move(name);
  }
  return names;
}

void write_expression(std::ostringstream& out, const std::vector<Term>& terms,
                      const std::vector<std::string>& names) {
  std::map<int, double> merged;
  for (const Term& t : terms) merged[t.var] += t.coef;
  bool first = true;
  int on_line = 0;
  for (auto [var, coef] : merged) {
    if (coef == 0.0) continue;
    if (on_line == 8) {
      out << "\n   ";
      on_line = 0;
    }
    out << (coef < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
    const double a = std::abs(coef);
    if (a != 1.0) out << format_number(a) << ' ';
    out << names[var];
    first = false;
    ++on_line;
  }
  if (first) out << "0 " << (names.empty() ? "x0" : names[0]);
}

}  // namespace

std::string export_lp_text(const MilpModel& model) {
  model.validate();
  const auto var_names = make_names(
      model.variables().size(), 'x',
      [&](std::size_t j) { return model.variables()[j].name; });
  const auto row_names = make_names(
      model.rows().size(), 'c', [&](std::size_t i) { return model.rows()[i].name; });

  std::ostringstream out;
  out << "\\ kadapt model: " << model.num_vars() << " variables, "
      << model.num_rows() << " rows\n";
  out << (model.sense() == ObjectiveSense::kMinimize ? "Minimize\n"
                                                     : "Maximize\n");
  out << " obj: ";
  if (model.num_vars() == 0) {
    out << format_number(model.objective_constant());
  } else {
    write_expression(out, model.objective(), var_names);
    if (model.objective_constant() != 0.0) {
      const double k = model.objective_constant();
      out << (k < 0 ? " - " : " + ") << format_number(std::abs(k));
    }
  }
  out << "\nSubject To\n";
  for (int i = 0; i < model.num_rows(); ++i) {
    const Row& row = model.rows()[i];
    out << ' ' << row_names[i] << ": ";
    write_expression(out, row.terms, var_names);
    out << ' ' << to_string(row.sense) << ' ' << format_number(row.rhs) << '\n';
  }
  out << "Bounds\n";
  std::vector<int> binaries, generals;
  for (int j = 0; j < model.num_vars(); ++j) {
    const Variable& v = model.variable(j);
    if (v.kind == VarKind::kBinary) {
      if (v.lo == 0.0 && v.hi == 1.0) {
        binaries.push_back(j);
        continue;
      }
      generals.push_back(j);
    }
    if (v.lo == v.hi) {
      out << ' ' << var_names[j] << " = " << format_number(v.lo) << '\n';
    } else {
      out << ' ' << format_number(v.lo) << " <= " << var_names[j]
          << " <= " << format_number(v.hi) << '\n';
    }
  }
  if (!binaries.empty()) {
    out << "Binary\n";
    for (int j : binaries) out << ' ' << var_names[j] << '\n';
  }
  if (!generals.empty()) {
    out << "General\n";
    for (int j : generals) out << ' ' << var_names[j] << '\n';
  }
  out << "End\n";
  return out.str();
}

namespace {

enum class Section { kNone, kObjective, kConstraints, kBounds, kBinary, kGeneral, kEnd };

struct Token {
  enum Kind { kNumber, kName, kSense, kSign, kColon } kind;
  std::string text;
  double number = 0.0;
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<Section> section_keyword(const std::string& line) {
  const std::string l = lower(line);
  if (l == "minimize" || l == "minimise" || l == "min" || l == "minimum") return Section::kObjective;
  if (l == "maximize" || l == "maximise" || l == "max" || l == "maximum") return Section::kObjective;
  if (l == "subject to" || l == "such that" || l == "st" || l == "s.t.") return Section::kConstraints;
  if (l == "bounds" || l == "bound") return Section::kBounds;
  if (l == "binary" || l == "binaries" || l == "bin") return Section::kBinary;
  if (l == "general" || l == "generals" || l == "gen" || l == "integer") return Section::kGeneral;
  if (l == "end") return Section::kEnd;
  return std::nullopt;
}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  std::size_t p = 0;
  while (p < text.size()) {
    const char c = text[p];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++p;
      continue;
    }
    if (c == ':') {
      tokens.push_back({Token::kColon, ":"});
      ++p;
      continue;
    }
    if (c == '<' || c == '>' || c == '=') {
      std::string s(1, c);
      ++p;
      if (p < text.size() && (text[p] == '=' || text[p] == '<' || text[p] == '>')) s += text[p++];
      if (s == "=<") s = "<=";
      if (s == "=>") s = ">=";
      if (s == "<") s = "<=";
      if (s == ">") s = ">=";
      if (s == "==") s = "=";
      tokens.push_back({Token::kSense, s});
      continue;
    }
    if (c == '+' || c == '-') {
      tokens.push_back({Token::kSign, std::string(1, c)});
      ++p;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t e = p;
      while (e < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[e])) || text[e] == '.' ||
              ((text[e] == 'e' || text[e] == 'E') && e + 1 < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[e + 1])) ||
                text[e + 1] == '+' || text[e + 1] == '-')) ||
              ((text[e] == '+' || text[e] == '-') && e > p &&
               (text[e - 1] == 'e' || text[e - 1] == 'E')))) {
        ++e;
      }
      const std::string num = text.substr(p, e - p);
      Token t{Token::kNumber, num};
      t.number = std::stod(num);
      tokens.push_back(t);
      p = e;
      continue;
    }
    std::size_t e = p;
    while (e < text.size() && !std::isspace(static_cast<unsigned char>(text[e])) &&
           text[e] != ':' && text[e] != '<' && text[e] != '>' && text[e] != '=' &&
           text[e] != '+' && text[e] != '-') {
      ++e;
    }
    if (e == p) throw ModelError(std::string("LP parse: unexpected character '") + c + "'");
    const std::string name = text.substr(p, e - p);
    const std::string l = lower(name);
    if (l == "inf" || l == "infinity") {
      Token t{Token::kNumber, name};
      t.number = kInfinity;
      tokens.push_back(t);
    } else {
      tokens.push_back({Token::kName, name});
    }
    p = e;
  }
  return tokens;
}

class LpReader {
 public:
  MilpModel read(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    Section section = Section::kNone;
    std::string buffer;
    bool maximize = false;
    const auto flush = [&]() {
      if (section == Section::kObjective) parse_objective(buffer);
      if (section == Section::kConstraints) parse_constraints(buffer);
      if (section == Section::kBounds) parse_bounds(buffer);
      if (section == Section::kBinary || section == Section::kGeneral) {
        for (const Token& t : tokenize(buffer)) {
          if (t.kind != Token::kName) throw ModelError("LP parse: bad integer section");
          const int j = var(t.text);
          if (section == Section::kBinary) binary_.insert(j);
          else general_.insert(j);
        }
      }
      buffer.clear();
    };
    while (std::getline(in, line)) {
      if (const auto cut = line.find('\\'); cut != std::string::npos) line.resize(cut);
      std::string trimmed = line;
      trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
      trimmed.erase(trimmed.find_last_not_of(" \t\r") + 1);
      if (trimmed.empty()) continue;
      if (auto s = section_keyword(trimmed)) {
        flush();
        const std::string l = lower(trimmed);
        if (*s == Section::kObjective) maximize = l.rfind("max", 0) == 0;
        section = *s;
        if (section == Section::kEnd) break;
        continue;
      }
      buffer += ' ';
      buffer += trimmed;
      if (section == Section::kConstraints || section == Section::kBounds) buffer += '\n';
    }
    flush();

    MilpModel model;
    for (std::size_t j = 0; j < names_.size(); ++j) {
      double lo = lo_[j];
      double hi = hi_[j];
      VarKind kind = VarKind::kContinuous;
      if (binary_.contains(static_cast<int>(j))) {
        kind = VarKind::kBinary;
        if (!lo_set_[j]) lo = 0.0;
        if (!hi_set_[j]) hi = 1.0;
      } else if (general_.contains(static_cast<int>(j))) {
        kind = VarKind::kBinary;
        if (lo < 0.0 || hi > 1.0) {
          throw ModelError("LP parse: general integers must lie in [0,1]");
        }
      }
      if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw ModelError("LP parse: variable '" + names_[j] + "' has an infinite bound");
      }
      model.add_variable(lo, hi, kind, names_[j]);
    }
    for (auto& row : rows_) model.add_row(std::move(row.terms), row.sense, row.rhs, row.name);
    model.set_objective(std::move(objective_), objective_constant_,
                        maximize ? ObjectiveSense::kMaximize : ObjectiveSense::kMinimize);
    return model;
  }

 private:
  int var(const std::string& name) {
    auto [it, inserted] = index_.try_emplace(name, static_cast<int>(names_.size()));
    if (inserted) {
      names_.push_back(name);
      lo_.push_back(0.0);
      hi_.push_back(kInfinity);
      lo_set_.push_back(false);
      hi_set_.push_back(false);
    }
    return it->second;
  }

  // Parses "[name:] linear-expression" returning terms and constant.
  std::size_t parse_linear(const std::vector<Token>& t, std::size_t p, std::size_t end,
                           std::vector<Term>& terms, double& constant) {
    while (p < end) {
      double sign = 1.0;
      bool any = false;
      while (p < end && t[p].kind == Token::kSign) {
        if (t[p].text == "-") sign = -sign;
        ++p;
        any = true;
      }
      if (p >= end) {
        if (any) throw ModelError("LP parse: dangling sign");
        break;
      }
      if (t[p].kind == Token::kNumber) {
        const double v = t[p].number;
        ++p;
        if (p < end && t[p].kind == Token::kName) {
          terms.push_back({var(t[p].text), sign * v});
          ++p;
        } else {
          constant += sign * v;
        }
      } else if (t[p].kind == Token::kName) {
        terms.push_back({var(t[p].text), sign});
        ++p;
      } else {
        break;
      }
    }
    return p;
  }

  void parse_objective(const std::string& text) {
    const auto t = tokenize(text);
    std::size_t p = 0;
    if (t.size() >= 2 && t[0].kind == Token::kName && t[1].kind == Token::kColon) p = 2;
    p = parse_linear(t, p, t.size(), objective_, objective_constant_);
    if (p != t.size()) throw ModelError("LP parse: malformed objective");
  }

  void parse_constraints(const std::string& text) {
    std::istringstream in(text);
    std::string pending;
    std::string line;
    // A constraint ends at the line holding its sense and rhs.
    while (std::getline(in, line)) {
      pending += ' ' + line;
      const auto t = tokenize(pending);
      bool has_sense = false;
      for (const Token& tok : t) has_sense |= tok.kind == Token::kSense;
      if (!has_sense) continue;
      if (t.back().kind != Token::kNumber) continue;
      std::size_t p = 0;
      ParsedRow row;
      if (t.size() >= 2 && t[0].kind == Token::kName && t[1].kind == Token::kColon) {
        row.name = t[0].text;
        p = 2;
      }
      double constant = 0.0;
      p = parse_linear(t, p, t.size(), row.terms, constant);
      if (p >= t.size() || t[p].kind != Token::kSense) throw ModelError("LP parse: malformed row");
      const std::string s = t[p].text;
      row.sense = s == "<=" ? RowSense::kLessEqual : s == ">=" ? RowSense::kGreaterEqual : RowSense::kEqual;
      ++p;
      double sign = 1.0;
      while (p < t.size() && t[p].kind == Token::kSign) {
        if (t[p].text == "-") sign = -sign;
        ++p;
      }
      if (p + 1 != t.size() || t[p].kind != Token::kNumber) throw ModelError("LP parse: malformed rhs");
      row.rhs = sign * t[p].number - constant;
      rows_.push_back(std::move(row));
      pending.clear();
    }
    if (!tokenize(pending).empty()) throw ModelError("LP parse: incomplete constraint");
  }

  void parse_bounds(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto t = tokenize(line);
      if (t.empty()) continue;
      // Collapse signed numbers.
      std::vector<Token> u;
      for (std::size_t p = 0; p < t.size(); ++p) {
        if (t[p].kind == Token::kSign && p + 1 < t.size() && t[p + 1].kind == Token::kNumber) {
          Token n = t[p + 1];
          if (t[p].text == "-") n.number = -n.number;
          u.push_back(n);
          ++p;
        } else {
          u.push_back(t[p]);
        }
      }
      const auto set_lo = [&](int j, double v) { lo_[j] = v; lo_set_[j] = true; };
      const auto set_hi = [&](int j, double v) { hi_[j] = v; hi_set_[j] = true; };
      if (u.size() == 2 && u[0].kind == Token::kName && lower(u[1].text) == "free") {
        const int j = var(u[0].text);
        set_lo(j, -kInfinity);
        set_hi(j, kInfinity);
      } else if (u.size() == 5 && u[0].kind == Token::kNumber && u[2].kind == Token::kName &&
                 u[4].kind == Token::kNumber && u[1].text == "<=" && u[3].text == "<=") {
        const int j = var(u[2].text);
        set_lo(j, u[0].number);
        set_hi(j, u[4].number);
      } else if (u.size() == 3 && u[0].kind == Token::kName && u[2].kind == Token::kNumber) {
        const int j = var(u[0].text);
        if (u[1].text == "<=") set_hi(j, u[2].number);
        else if (u[1].text == ">=") set_lo(j, u[2].number);
        else { set_lo(j, u[2].number); set_hi(j, u[2].number); }
      } else if (u.size() == 3 && u[0].kind == Token::kNumber && u[2].kind == Token::kName) {
        const int j = var(u[2].text);
        if (u[1].text == "<=") set_lo(j, u[0].number);
        else if (u[1].text == ">=") set_hi(j, u[0].number);
        else { set_lo(j, u[0].number); set_hi(j, u[0].number); }
      } else {
        throw ModelError("LP parse: malformed bound '" + line + "'");
      }
    }
  }

  struct ParsedRow {
    std::vector<Term> terms;
    RowSense sense = RowSense::kLessEqual;
    double rhs = 0.0;
    std::string name;
  };

  std::unordered_map<std::string, int> index_;
  std::vector<std::string> names_;
  std::vector<double> lo_, hi_;
  std::vector<bool> lo_set_, hi_set_;
  std::set<int> binary_, general_;
  std::vector<ParsedRow> rows_;
  std::vector<Term> objective_;
  double objective_constant_ = 0.0;
};

}  // namespace

MilpModel parse_lp_text(std::string_view text) { return LpReader().read(text); }

}  // namespace kadapt::milp
