#pragma once

// LP text subset used by the artifact. Canonical layout (writeLp):
//
//   \ name: <identifier>
//   Minimize
//    obj: 2 x0 - 3 x1
//   Subject To
//    c0: 1 x0 + 1 x1 <= 1
//   Bounds
//    0 <= x0 <= 1
//    x2 free
//   Binary
//    x0 x1
//   General
//    x3
//   End
//
// Variables are named x<i> with zero-based i. Numbers are serialized with 17
// significant digits, which round-trips IEEE-754 doubles exactly, so
// writeLp(readLp(writeLp(i))) == writeLp(i) byte for byte. An expression with
// no nonzero term is written as "0 x0"; explicit zero coefficients are dropped
// from the triplet list when parsing. Every variable gets exactly one Bounds
// line ("x<i> free" when both bounds are infinite, one-sided infinities use
// the inf/-inf tokens). `Maximize` input is accepted and converted to
// minimization by negating the objective.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "apollo/errors.hpp"
#include "apollo/milp.hpp"

namespace apollo {

/// %.17g formatting; shortest text that recovers the exact double is not
/// required, 17 significant digits always do.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline void appendExpr(std::string& out, const std::vector<std::pair<int, double>>& terms) {
  if (terms.empty()) {
    out += "0 x0";
    return;
  }
  bool first = true;
  for (const auto& [col, coef] : terms) {
    if (first) {
      out += fmt17(coef);
      first = false;
    } else if (coef < 0) {
      out += " - " + fmt17(-coef);
    } else {
      out += " + " + fmt17(coef);
    }
    out += " x" + std::to_string(col);
  }
}

inline std::string boundToken(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return fmt17(v);
}

}  // namespace detail

inline std::string writeLp(const MilpInstance& inst) {
  std::string out;
  out.reserve(64 * static_cast<std::size_t>(inst.numVars + inst.numRows() + 4));
  if (!inst.name.empty()) out += "\\ name: " + inst.name + "\n";
  out += "Minimize\n obj: ";
  {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < inst.numVars; ++j)
      if (inst.objective[j] != 0.0) terms.emplace_back(j, inst.objective[j]);
    detail::appendExpr(out, terms);
  }
  out += "\nSubject To\n";
  const int m = inst.numRows();
  // per-row terms in stored (appearance) order, so row/column ordering survives
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(m));
  for (const Triplet& t : inst.triplets) rows[t.row].emplace_back(t.col, t.value);
  for (int r = 0; r < m; ++r) {
    out += " c" + std::to_string(r) + ": ";
    detail::appendExpr(out, rows[r]);
    switch (inst.senses[r]) {
      case RowSense::LessEqual: out += " <= "; break;
      case RowSense::GreaterEqual: out += " >= "; break;
      case RowSense::Equal: out += " = "; break;
    }
    out += fmt17(inst.rhs[r]) + "\n";
  }
  out += "Bounds\n";
  for (int j = 0; j < inst.numVars; ++j) {
    if (inst.lower[j] == -kInf && inst.upper[j] == kInf) {
      out += " x" + std::to_string(j) + " free\n";
    } else {
      out += " " + detail::boundToken(inst.lower[j]) + " <= x" + std::to_string(j) + " <= " +
             detail::boundToken(inst.upper[j]) + "\n";
    }
  }
  std::string binaries, generals;
  for (int j = 0; j < inst.numVars; ++j) {
    if (inst.kinds[j] == VarKind::Binary) binaries += " x" + std::to_string(j);
    if (inst.kinds[j] == VarKind::Integer) generals += " x" + std::to_string(j);
  }
  if (!binaries.empty()) out += "Binary\n" + binaries + "\n";
  if (!generals.empty()) out += "General\n" + generals + "\n";
  out += "End\n";
  return out;
}

namespace detail {

enum class TokKind { Word, Number, Op, Eof };

struct Token {
  TokKind kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int col = 1;
};

class LpLexer {
public:
  explicit LpLexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

  std::string commentName() const { return name_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, tok_.line, tok_.col);
  }

private:
  void advance() {
    skipSpaceAndComments();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= text_.size()) {
      tok_ = {TokKind::Eof, "", 0.0, line_, col_};
      return;
    }
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* start = text_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(start, &end);
      if (end == start) throw ParseError("malformed number", line_, col_);
      std::size_t len = static_cast<std::size_t>(end - start);
      tok_ = {TokKind::Number, text_.substr(pos_, len), v, line_, col_};
      bump(len);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t e = pos_;
      while (e < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[e])) ||
                                  text_[e] == '_' || text_[e] == '.'))
        ++e;
      tok_ = {TokKind::Word, text_.substr(pos_, e - pos_), 0.0, line_, col_};
      bump(e - pos_);
      return;
    }
    if (c == '<' || c == '>') {
      std::size_t len = (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') ? 2 : 1;
      tok_ = {TokKind::Op, text_.substr(pos_, len), 0.0, line_, col_};
      bump(len);
      return;
    }
    if (c == '=' || c == '+' || c == '-' || c == ':') {
      tok_ = {TokKind::Op, std::string(1, c), 0.0, line_, col_};
      bump(1);
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

  void skipSpaceAndComments() {
    for (;;) {
      while (pos_ < text_.size() &&
             (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r' ||
              text_[pos_] == '\n'))
        bump(1);
      if (pos_ < text_.size() && text_[pos_] == '\\') {
        std::size_t eol = text_.find('\n', pos_);
        std::string comment =
            text_.substr(pos_ + 1, (eol == std::string::npos ? text_.size() : eol) - pos_ - 1);
        std::size_t k = comment.find("name:");
        if (name_.empty() && k != std::string::npos) {
          std::string n = comment.substr(k + 5);
          while (!n.empty() && n.front() == ' ') n.erase(n.begin());
          while (!n.empty() && (n.back() == ' ' || n.back() == '\r')) n.pop_back();
          name_ = n;
        }
        bump((eol == std::string::npos ? text_.size() : eol) - pos_);
        continue;
      }
      break;
    }
  }

  void bump(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i, ++pos_) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
  std::string name_;
};

inline std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool isKeyword(const Token& t, const char* kw) {
  return t.kind == TokKind::Word && lowercase(t.text) == kw;
}

// Section keywords terminate expressions.
inline bool startsSection(const Token& t) {
  if (t.kind != TokKind::Word) return false;
  std::string w = lowercase(t.text);
  return w == "minimize" || w == "maximize" || w == "subject" || w == "bounds" ||
         w == "binary" || w == "binaries" || w == "general" || w == "generals" || w == "end";
}

inline int parseVarName(LpLexer& lex, const Token& t) {
  if (t.kind != TokKind::Word || t.text.size() < 2 || t.text[0] != 'x')
    throw ParseError("expected variable name x<i>, got '" + t.text + "'", t.line, t.col);
  for (std::size_t i = 1; i < t.text.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(t.text[i])))
      throw ParseError("expected variable name x<i>, got '" + t.text + "'", t.line, t.col);
  (void)lex;
  return std::atoi(t.text.c_str() + 1);
}

}  // namespace detail

inline MilpInstance readLp(const std::string& text) {
  using namespace detail;
  LpLexer lex(text);

  struct RawTerm {
    int row;  // -1 for objective
    int col;
    double coef;
  };
  std::vector<RawTerm> terms;
  std::vector<RowSense> senses;
  std::vector<double> rhs;
  struct BoundEntry {
    int var;
    double lo, hi;
  };
  std::vector<BoundEntry> bounds;
  std::vector<int> binaryVars, generalVars;
  bool maximize = false;
  int maxVar = -1;
  auto note = [&maxVar](int v) { maxVar = std::max(maxVar, v); };

  // expression: [name ':'] signed terms until a relational op or section word
  auto parseExpr = [&](int row) {
    if (lex.peek().kind == TokKind::Word && !startsSection(lex.peek())) {
      Token name = lex.next();
      if (lex.peek().kind == TokKind::Op && lex.peek().text == ":") {
        lex.next();
      } else {
        throw ParseError("expected ':' after row name '" + name.text + "'", name.line, name.col);
      }
    }
    bool any = false;
    for (;;) {
      Token t = lex.peek();
      if (t.kind == TokKind::Eof || startsSection(t)) break;
      if (t.kind == TokKind::Op && (t.text == "<=" || t.text == ">=" || t.text == "=" ||
                                    t.text == "<" || t.text == ">"))
        break;
      double sign = 1.0;
      while (lex.peek().kind == TokKind::Op &&
             (lex.peek().text == "+" || lex.peek().text == "-")) {
        if (lex.next().text == "-") sign = -sign;
      }
      double coef = 1.0;
      if (lex.peek().kind == TokKind::Number) coef = lex.next().number;
      Token vt = lex.peek();
      if (vt.kind == TokKind::Word && !startsSection(vt)) {
        int col = parseVarName(lex, lex.next());
        note(col);
        double value = sign * coef;
        if (value != 0.0) terms.push_back({row, col, value});
        any = true;
      } else if (coef == 0.0 || sign * coef == 0.0) {
        any = true;  // constant 0 stands for an empty expression
      } else {
        lex.fail("expected variable after coefficient");
      }
    }
    if (!any) lex.fail("empty expression");
  };

  auto parseSignedNumberOrInf = [&]() -> double {
    double sign = 1.0;
    while (lex.peek().kind == TokKind::Op &&
           (lex.peek().text == "+" || lex.peek().text == "-")) {
      if (lex.next().text == "-") sign = -sign;
    }
    Token t = lex.next();
    if (t.kind == TokKind::Number) return sign * t.number;
    if (t.kind == TokKind::Word && lowercase(t.text) == "inf") return sign * kInf;
    throw ParseError("expected number or inf, got '" + t.text + "'", t.line, t.col);
  };

  // Minimize / Maximize
  {
    Token t = lex.next();
    if (isKeyword(t, "maximize")) {
      maximize = true;
    } else if (!isKeyword(t, "minimize")) {
      throw ParseError("expected Minimize or Maximize", t.line, t.col);
    }
  }
  parseExpr(-1);

  // Subject To
  {
    Token t = lex.next();
    if (!isKeyword(t, "subject")) throw ParseError("expected Subject To", t.line, t.col);
    Token t2 = lex.next();
    if (!isKeyword(t2, "to")) throw ParseError("expected To after Subject", t2.line, t2.col);
  }
  while (lex.peek().kind != TokKind::Eof && !startsSection(lex.peek())) {
    int row = static_cast<int>(rhs.size());
    parseExpr(row);
    Token op = lex.next();
    RowSense sense;
    if (op.kind == TokKind::Op && (op.text == "<=" || op.text == "<"))
      sense = RowSense::LessEqual;
    else if (op.kind == TokKind::Op && (op.text == ">=" || op.text == ">"))
      sense = RowSense::GreaterEqual;
    else if (op.kind == TokKind::Op && op.text == "=")
      sense = RowSense::Equal;
    else
      throw ParseError("expected <=, >= or = after row expression", op.line, op.col);
    senses.push_back(sense);
    rhs.push_back(parseSignedNumberOrInf());
  }

  // Optional sections in any order
  while (lex.peek().kind != TokKind::Eof) {
    Token sec = lex.next();
    if (isKeyword(sec, "end")) break;
    if (isKeyword(sec, "bounds")) {
      while (lex.peek().kind != TokKind::Eof && !startsSection(lex.peek())) {
        if (lex.peek().kind == TokKind::Word && lex.peek().text[0] == 'x') {
          // "x<i> free"  or  "x<i> <= u"
          Token vt = lex.next();
          int var = parseVarName(lex, vt);
          note(var);
          if (isKeyword(lex.peek(), "free")) {
            lex.next();
            bounds.push_back({var, -kInf, kInf});
          } else {
            Token op = lex.next();
            if (op.kind != TokKind::Op || (op.text != "<=" && op.text != ">="))
              throw ParseError("expected free, <= or >= in bound", op.line, op.col);
            double v = parseSignedNumberOrInf();
            if (op.text == "<=")
              bounds.push_back({var, 0.0, v});
            else
              bounds.push_back({var, v, kInf});
          }
        } else {
          // "l <= x<i> <= u"
          double lo = parseSignedNumberOrInf();
          Token op = lex.next();
          if (op.kind != TokKind::Op || op.text != "<=")
            throw ParseError("expected <= in bound line", op.line, op.col);
          Token vt = lex.next();
          int var = parseVarName(lex, vt);
          note(var);
          Token op2 = lex.next();
          if (op2.kind != TokKind::Op || op2.text != "<=")
            throw ParseError("expected <= in bound line", op2.line, op2.col);
          double hi = parseSignedNumberOrInf();
          bounds.push_back({var, lo, hi});
        }
      }
    } else if (isKeyword(sec, "binary") || isKeyword(sec, "binaries")) {
      while (lex.peek().kind == TokKind::Word && !startsSection(lex.peek())) {
        int var = parseVarName(lex, lex.next());
        note(var);
        binaryVars.push_back(var);
      }
    } else if (isKeyword(sec, "general") || isKeyword(sec, "generals")) {
      while (lex.peek().kind == TokKind::Word && !startsSection(lex.peek())) {
        int var = parseVarName(lex, lex.next());
        note(var);
        generalVars.push_back(var);
      }
    } else {
      throw ParseError("unexpected section '" + sec.text + "'", sec.line, sec.col);
    }
  }

  MilpInstance inst;
  inst.name = lex.commentName();
  inst.numVars = maxVar + 1;
  inst.objective.assign(static_cast<std::size_t>(inst.numVars), 0.0);
  inst.kinds.assign(static_cast<std::size_t>(inst.numVars), VarKind::Continuous);
  for (int v : binaryVars) inst.kinds[v] = VarKind::Binary;
  for (int v : generalVars) inst.kinds[v] = VarKind::Integer;
  inst.lower.resize(inst.numVars);
  inst.upper.resize(inst.numVars);
  for (int j = 0; j < inst.numVars; ++j) {
    bool bin = inst.kinds[j] == VarKind::Binary;
    inst.lower[j] = 0.0;
    inst.upper[j] = bin ? 1.0 : kInf;
  }
  for (const BoundEntry& b : bounds) {
    inst.lower[b.var] = b.lo;
    inst.upper[b.var] = b.hi;
  }
  inst.senses = std::move(senses);
  inst.rhs = std::move(rhs);
  for (const RawTerm& t : terms) {
    if (t.row < 0)
      inst.objective[t.col] += t.coef;
    else
      inst.triplets.push_back({t.row, t.col, t.coef});
  }
  if (maximize)
    for (double& c : inst.objective) c = (c == 0.0) ? 0.0 : -c;
  inst.validate();
  return inst;
}

}  // namespace apollo
