#include "mpl/parser.hpp"

#include <cctype>
#include <optional>

#include "mpl/prompt.hpp"

namespace mpl {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

struct TermResult {
  enum class Status { Ok, Malformed, Truncated } status = Status::Ok;
  std::string name;
  std::vector<std::string> args;
  std::string error;
};

class CollectionParser {
 public:
  CollectionParser(std::string_view text, Dialect dialect, const LabelSchema& schema,
                   PredictionSet& out)
      : text_(text), dialect_(dialect), schema_(schema), out_(out) {}

  void run() {
    const auto opened = find_opener();
    if (!opened) {
      diag(0, text_.size(), "no collection literal found");
      return;
    }
    pos_ = *opened;
    const char closer = closing_char();

    while (true) {
      skip_ws();
      if (at_end()) {
        out_.truncated = true;
        diag(literal_begin_, text_.size(), "unterminated collection literal");
        return;
      }
      if (peek() == closer) return;
      if (peek() == ',') {
        diag(pos_, pos_ + 1, "empty term");
        ++pos_;
        continue;
      }

      const std::size_t term_begin = pos_;
      TermResult term = parse_term();
      if (term.status == TermResult::Status::Ok) {
        skip_ws();
        if (at_end()) {
          // A complete term with no delimiter after it still counts.
          accept(term, term_begin, pos_);
          out_.truncated = true;
          diag(literal_begin_, text_.size(), "unterminated collection literal");
          return;
        }
        if (peek() == ',' || peek() == closer) {
          accept(term, term_begin, pos_);
          if (peek() == ',') {
            ++pos_;
            continue;
          }
          return;
        }
        term.status = TermResult::Status::Malformed;
        term.error = "unexpected character after term";
      }
      if (term.status == TermResult::Status::Truncated) {
        out_.truncated = true;
        diag(term_begin, text_.size(), "truncated term");
        return;
      }
      if (!resync(term_begin, closer)) {
        out_.truncated = true;
        diag(term_begin, text_.size(), "truncated term: " + term.error);
        return;
      }
      diag(term_begin, pos_, "malformed term: " + term.error);
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      return;
    }
  }

 private:
  std::optional<std::size_t> find_opener() {
    std::string_view opener;
    switch (dialect_) {
      case Dialect::PY: opener = "["; break;
      case Dialect::CPP: opener = "{"; break;
      case Dialect::JAVA: opener = "List.of("; break;
    }
    const auto at = text_.find(opener);
    if (at == std::string_view::npos) return std::nullopt;
    literal_begin_ = at;
    return at + opener.size();
  }

  char closing_char() const {
    switch (dialect_) {
      case Dialect::PY: return ']';
      case Dialect::CPP: return '}';
      case Dialect::JAVA: return ')';
    }
    return ']';
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void skip_ws() {
    while (!at_end() && is_space(peek())) ++pos_;
  }

  void diag(std::size_t begin, std::size_t end, std::string message) {
    out_.diagnostics.push_back({begin, end, std::move(message)});
  }

  // `new`? Name `(` string (`,` string)* `)`
  TermResult parse_term() {
    TermResult r;
    auto malformed = [&](std::string why) {
      r.status = TermResult::Status::Malformed;
      r.error = std::move(why);
      return r;
    };
    auto truncated = [&]() {
      r.status = TermResult::Status::Truncated;
      return r;
    };

    if (!is_ident_start(peek())) return malformed("expected constructor name");
    std::string name = read_ident();
    if (name == "new") {
      skip_ws();
      if (at_end()) return truncated();
      if (!is_ident_start(peek())) return malformed("expected constructor name after 'new'");
      name = read_ident();
    }
    if (at_end()) return truncated();
    r.name = std::move(name);

    skip_ws();
    if (at_end()) return truncated();
    if (peek() != '(') return malformed("expected '(' after '" + r.name + "'");
    ++pos_;

    while (true) {
      skip_ws();
      if (at_end()) return truncated();
      if (peek() == ')' && r.args.empty()) {
        ++pos_;
        return r;
      }
      if (peek() != '"' && peek() != '\'') return malformed("expected string argument");
      auto s = read_string();
      if (!s) return truncated();
      r.args.push_back(std::move(*s));
      skip_ws();
      if (at_end()) return truncated();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ')') {
        ++pos_;
        return r;
      }
      return malformed("expected ',' or ')' in argument list");
    }
  }

  std::string read_ident() {
    const std::size_t begin = pos_;
    while (!at_end() && is_ident_char(peek())) ++pos_;
    return std::string(text_.substr(begin, pos_ - begin));
  }

  // Returns nullopt when the input ends inside the literal.
  std::optional<std::string> read_string() {
    const char quote = peek();
    ++pos_;
    std::string out;
    while (!at_end()) {
      const char c = peek();
      ++pos_;
      if (c == quote) return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_end()) return std::nullopt;
      const char e = peek();
      ++pos_;
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default: out.push_back(e);
      }
    }
    return std::nullopt;
  }

  // Skips from `begin` to the next top-level ',' or closer, respecting
  // strings and nesting. Returns false if the input ends first.
  bool resync(std::size_t begin, char closer) {
    pos_ = begin;
    int depth = 0;
    while (!at_end()) {
      const char c = peek();
      if (c == '"' || c == '\'') {
        if (!read_string()) return false;
        continue;
      }
      if (depth == 0 && (c == ',' || c == closer)) return true;
      if (c == '(' || c == '[' || c == '{') {
        ++depth;
      } else if (c == ')' || c == ']' || c == '}') {
        if (depth == 0) return true;  // a different closer; treat as end of literal
        --depth;
      }
      ++pos_;
    }
    return false;
  }

  void accept(const TermResult& term, std::size_t begin, std::size_t end) {
    auto reject = [&](std::string why) { diag(begin, end, std::move(why)); };
    auto arity = [&](std::size_t n) {
      if (term.args.size() == n) return true;
      reject(term.name + " expects " + std::to_string(n) + " arguments, got " +
             std::to_string(term.args.size()));
      return false;
    };

    Annotation a;
    if (term.name == "Entity") {
      if (!arity(2)) return;
      a = make_entity(term.args[0], term.args[1]);
    } else if (term.name == "Relation") {
      if (!arity(3)) return;
      a = make_relation(term.args[0], term.args[1], term.args[2]);
    } else if (term.name == "Trigger") {
      if (!arity(2)) return;
      a = make_trigger(term.args[0], term.args[1]);
    } else if (term.name == "Argument") {
      if (!arity(3)) return;
      a = make_argument(term.args[0], term.args[1], term.args[2]);
    } else {
      reject("unknown constructor '" + term.name + "'");
      return;
    }

    if (!admits(schema_.task(), a)) {
      reject(term.name + " is not an output of task " + std::string(to_string(schema_.task())));
      return;
    }
    const auto* label = schema_.find_label(label_of(a));
    if (label == nullptr) {
      reject("off-schema label '" + label_of(a) + "'");
      return;
    }
    if (const auto* arg = std::get_if<EventArgument>(&a)) {
      if (!label->role_index(arg->role)) {
        reject("off-schema role '" + arg->role + "' for '" + label->name + "'");
        return;
      }
    }
    for (auto s : surfaces_of(a)) {
      if (s.empty()) {
        reject("empty surface");
        return;
      }
    }
    out_.annotations.insert(std::move(a));
  }

  std::string_view text_;
  Dialect dialect_;
  const LabelSchema& schema_;
  PredictionSet& out_;
  std::size_t pos_ = 0;
  std::size_t literal_begin_ = 0;
};

}  // namespace

PredictionSet parse_completion(std::string_view text, Dialect dialect, const LabelSchema& schema,
                               std::string instance_id) {
  PredictionSet out;
  out.instance_id = std::move(instance_id);
  out.dialect = dialect;
  CollectionParser(text, dialect, schema, out).run();
  return out;
}

bool roundtrip_check(const TaskInstance& inst, const LabelSchema& schema, Dialect dialect) {
  const auto gold = render_gold_output(inst, schema, dialect);
  const auto parsed = parse_completion(gold.text, dialect, schema, inst.id);
  return parsed.diagnostics.empty() && !parsed.truncated && parsed.annotations == inst.gold;
}

json prediction_record(const PredictionSet& p) {
  json diags = json::array();
  for (const auto& d : p.diagnostics) {
    diags.push_back({{"begin", d.begin}, {"end", d.end}, {"message", d.message}});
  }
  return {{"id", p.instance_id},
          {"dialect", std::string(to_string(p.dialect))},
          {"annotations", annotations_to_json(p.annotations)},
          {"diagnostics", diags},
          {"truncated", p.truncated}};
}

PredictionSet prediction_from_record(const json& row) {
  PredictionSet p;
  p.instance_id = row.at("id").get<std::string>();
  p.dialect = parse_dialect(row.at("dialect").get<std::string>());
  for (const auto& a : row.at("annotations")) p.annotations.insert(annotation_from_json(a));
  if (row.contains("diagnostics")) {
    for (const auto& d : row.at("diagnostics")) {
      p.diagnostics.push_back({d.at("begin").get<std::size_t>(), d.at("end").get<std::size_t>(),
                               d.at("message").get<std::string>()});
    }
  }
  p.truncated = row.value("truncated", false);
  return p;
}

}  // namespace mpl
