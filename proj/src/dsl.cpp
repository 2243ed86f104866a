#include "a653/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace a653::dsl {

StmtPtr act(std::string text) {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::Act;
    s->act = std::move(text);
    return s;
}

StmtPtr seq(StmtPtr a, StmtPtr b) {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::Seq;
    s->first = std::move(a);
    s->second = std::move(b);
    return s;
}

StmtPtr if_then(Cond c, StmtPtr body) {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::If;
    s->cond = std::move(c);
    s->first = std::move(body);
    return s;
}

StmtPtr if_then_else(Cond c, StmtPtr then_branch, StmtPtr else_branch) {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::IfElse;
    s->cond = std::move(c);
    s->first = std::move(then_branch);
    s->second = std::move(else_branch);
    return s;
}

bool equal(const StmtPtr& a, const StmtPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Stmt::Kind::Act: return a->act == b->act;
        case Stmt::Kind::Seq: return equal(a->first, b->first) && equal(a->second, b->second);
        case Stmt::Kind::If: return a->cond == b->cond && equal(a->first, b->first);
        case Stmt::Kind::IfElse:
            return a->cond == b->cond && equal(a->first, b->first) && equal(a->second, b->second);
    }
    return false;
}

int count_ifs(const StmtPtr& s) {
    if (!s) return 0;
    const int own = (s->kind == Stmt::Kind::If || s->kind == Stmt::Kind::IfElse) ? 1 : 0;
    return own + count_ifs(s->first) + count_ifs(s->second);
}

bool equal(const ServiceSpec& a, const ServiceSpec& b) {
    return a.name == b.name && a.params == b.params && a.errors == b.errors && equal(a.normal, b.normal);
}

ParseError::ParseError(int line, int column, std::string message, std::vector<std::string> expected)
    : std::runtime_error([&] {
          std::string m = std::to_string(line) + ":" + std::to_string(column) + ": " + message;
          if (!expected.empty()) {
              m += " (expected";
              for (std::size_t i = 0; i < expected.size(); ++i) m += (i == 0 ? " " : " or ") + expected[i];
              m += ")";
          }
          return m;
      }()),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

/// Collapses whitespace runs to one space and trims.
std::string squeeze(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out += ' ';
        space = false;
        out += c;
    }
    return out;
}

Cond make_cond(std::string text) {
    // `not (x)` wrapping the whole text is a negation
    if (text.size() > 6 && lower(text.substr(0, 5)) == "not (" && text.back() == ')') {
        int depth = 0;
        bool whole = true;
        for (std::size_t i = 4; i < text.size(); ++i) {
            if (text[i] == '(') ++depth;
            if (text[i] == ')') --depth;
            if (depth == 0 && i + 1 < text.size()) {
                whole = false;
                break;
            }
        }
        if (whole) return make_cond(squeeze(text.substr(5, text.size() - 6))).negate();
    }
    return Cond{std::move(text), false};
}

StmtPtr chain(const std::vector<StmtPtr>& stmts) {
    if (stmts.empty()) return nullptr;
    StmtPtr out = stmts.back();
    for (auto it = stmts.rbegin() + 1; it != stmts.rend(); ++it) out = seq(*it, out);
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view text) : t_(text) {}

    ServiceSpec service() {
        ServiceSpec spec;
        keyword("procedure");
        spec.name = word("service name");
        skip();
        if (peek() == '(') spec.params = params();
        keyword("is");
        if (at_keyword("error")) {
            keyword("error");
            while (at_keyword("when")) spec.errors.push_back(error_clause());
        }
        keyword("normal");
        spec.normal = chain(statements());
        keyword("end");
        const auto close = word("service name");
        if (close != spec.name) fail("`end " + close + "` does not close `" + spec.name + "`", {spec.name});
        symbol(';');
        skip();
        if (!eof()) fail("text after the end of the service", {"end of input"});
        return spec;
    }

    StmtPtr bare() {
        auto s = chain(statements());
        skip();
        if (!eof()) fail("unexpected `" + preview() + "`", {"statement", "end of input"});
        return s;
    }

private:
    std::string_view t_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;

    bool eof() const { return pos_ >= t_.size(); }
    char peek() const { return eof() ? '\0' : t_[pos_]; }

    void advance() {
        if (t_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip() {
        while (!eof()) {
            if (std::isspace(static_cast<unsigned char>(peek()))) {
                advance();
            } else if (t_.substr(pos_, 2) == "--") {
                while (!eof() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    std::string preview() const {
        if (eof()) return "end of input";
        auto end = pos_;
        while (end < t_.size() && !std::isspace(static_cast<unsigned char>(t_[end])) && end - pos_ < 20) ++end;
        return std::string(t_.substr(pos_, end - pos_));
    }

    [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
        throw ParseError(line_, col_, msg, std::move(expected));
    }

    static bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

    std::string peek_word() {
        skip();
        auto end = pos_;
        while (end < t_.size() && word_char(t_[end])) ++end;
        return std::string(t_.substr(pos_, end - pos_));
    }

    bool at_keyword(std::string_view kw) { return lower(peek_word()) == kw; }

    std::string word(const std::string& what) {
        const auto w = peek_word();
        if (w.empty()) fail("unexpected `" + preview() + "`", {what});
        for (std::size_t i = 0; i < w.size(); ++i) advance();
        return w;
    }

    void keyword(std::string_view kw) {
        if (!at_keyword(kw)) fail("unexpected `" + preview() + "`", {"`" + std::string(kw) + "`"});
        for (std::size_t i = 0; i < kw.size(); ++i) advance();
    }

    void symbol(char c) {
        skip();
        if (peek() != c) fail("unexpected `" + preview() + "`", {std::string("`") + c + "`"});
        advance();
    }

    void symbol(std::string_view s) {
        skip();
        if (t_.substr(pos_, s.size()) != s) fail("unexpected `" + preview() + "`", {"`" + std::string(s) + "`"});
        for (std::size_t i = 0; i < s.size(); ++i) advance();
    }

    std::vector<Param> params() {
        std::vector<Param> out;
        symbol('(');
        while (true) {
            Param p;
            p.name = word("parameter name");
            symbol(':');
            if (at_keyword("out")) {
                keyword("out");
                p.mode = ParamMode::Out;
            } else {
                keyword("in");
                p.mode = ParamMode::In;
                if (at_keyword("out")) {
                    keyword("out");
                    p.mode = ParamMode::InOut;
                }
            }
            p.type = word("parameter type");
            out.push_back(std::move(p));
            skip();
            if (peek() == ')') break;
            symbol(';');
        }
        symbol(')');
        return out;
    }

    std::string parenthesized() {
        symbol('(');
        const auto start = pos_;
        int depth = 1;
        while (true) {
            if (eof()) fail("unbalanced parenthesis", {"`)`"});
            if (peek() == '(') ++depth;
            if (peek() == ')' && --depth == 0) break;
            advance();
        }
        const auto text = squeeze(t_.substr(start, pos_ - start));
        advance();
        if (text.empty()) fail("empty condition", {"condition"});
        return text;
    }

    ErrorClause error_clause() {
        keyword("when");
        ErrorClause e;
        e.cond = make_cond(parenthesized());
        symbol("=>");
        const auto rc = word("RETURN_CODE");
        if (rc != "RETURN_CODE") fail("error clauses assign RETURN_CODE", {"RETURN_CODE"});
        symbol(":=");
        e.return_code = word("return code");
        symbol(';');
        return e;
    }

    std::vector<StmtPtr> statements() {
        std::vector<StmtPtr> out;
        while (true) {
            skip();
            if (eof()) return out;
            const auto w = lower(peek_word());
            if (w == "end" || w == "else") return out;
            if (w == "if") {
                out.push_back(if_stmt());
            } else {
                out.push_back(action());
            }
        }
    }

    StmtPtr action() {
        skip();
        const auto start = pos_;
        int depth = 0;
        while (true) {
            if (eof()) fail("statement not terminated", {"`;`"});
            const char c = peek();
            if (c == '(') ++depth;
            if (c == ')') --depth;
            if (c == ';' && depth <= 0) break;
            if (t_.substr(pos_, 2) == "--") fail("comment inside a statement", {"`;`"});
            advance();
        }
        const auto text = squeeze(t_.substr(start, pos_ - start));
        advance();
        if (text.empty()) fail("empty statement", {"statement"});
        return act(text);
    }

    StmtPtr if_stmt() {
        keyword("if");
        const Cond c = make_cond(parenthesized());
        keyword("then");
        const auto then_branch = chain(statements());
        StmtPtr result;
        if (at_keyword("else")) {
            keyword("else");
            const auto else_branch = chain(statements());
            result = if_then_else(c, then_branch, else_branch);
        } else {
            result = if_then(c, then_branch);
        }
        keyword("end");
        keyword("if");
        symbol(';');
        return result;
    }
};

}  // namespace

ServiceSpec parse_service(std::string_view text) { return Parser(text).service(); }

StmtPtr parse_statements(std::string_view text) { return Parser(text).bare(); }

namespace {

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 4, ' '); }

std::string_view mode_text(ParamMode m) {
    switch (m) {
        case ParamMode::In: return "in";
        case ParamMode::Out: return "out";
        case ParamMode::InOut: return "in out";
    }
    return "in";
}

}  // namespace

std::string pretty(const StmtPtr& s, int indent) {
    if (!s) return {};
    switch (s->kind) {
        case Stmt::Kind::Act: return pad(indent) + s->act + ";\n";
        case Stmt::Kind::Seq: return pretty(s->first, indent) + pretty(s->second, indent);
        case Stmt::Kind::If:
            return pad(indent) + "if (" + s->cond.text() + ") then\n" + pretty(s->first, indent + 1) + pad(indent) +
                   "end if;\n";
        case Stmt::Kind::IfElse:
            return pad(indent) + "if (" + s->cond.text() + ") then\n" + pretty(s->first, indent + 1) + pad(indent) +
                   "else\n" + pretty(s->second, indent + 1) + pad(indent) + "end if;\n";
    }
    return {};
}

std::string pretty(const ServiceSpec& spec) {
    std::string out = "procedure " + spec.name;
    if (!spec.params.empty()) {
        out += "\n    (";
        for (std::size_t i = 0; i < spec.params.size(); ++i) {
            const auto& p = spec.params[i];
            if (i > 0) out += ";\n     ";
            out += p.name + " : " + std::string(mode_text(p.mode)) + " " + p.type;
        }
        out += ")";
    }
    out += " is\n";
    if (!spec.errors.empty()) {
        out += "error\n";
        for (const auto& e : spec.errors) {
            out += "    when (" + e.cond.text() + ") =>\n        RETURN_CODE := " + e.return_code + ";\n";
        }
    }
    out += "normal\n" + pretty(spec.normal, 1) + "end " + spec.name + ";\n";
    return out;
}

std::vector<ProtoEvent> translate(std::vector<ProtoEvent> evts, const StmtPtr& stmt) {
    if (!stmt) return evts;
    switch (stmt->kind) {
        case Stmt::Kind::Act:
            for (auto& e : evts) e.actions.push_back(stmt->act);
            return evts;
        case Stmt::Kind::Seq:
            return translate(translate(std::move(evts), stmt->first), stmt->second);
        case Stmt::Kind::If:
        case Stmt::Kind::IfElse: {
            auto other = evts;
            for (auto& e : evts) e.guards.push_back(stmt->cond);
            for (auto& e : other) e.guards.push_back(stmt->cond.negate());
            evts = translate(std::move(evts), stmt->first);
            if (stmt->kind == Stmt::Kind::IfElse) other = translate(std::move(other), stmt->second);
            evts.insert(evts.end(), other.begin(), other.end());
            return evts;
        }
    }
    return evts;
}

Translation translate_service(const ServiceSpec& spec) {
    auto all = translate({ProtoEvent{spec.name, {}, {}}}, spec.normal);
    Translation t;
    int kept = 0;
    int empty = 0;
    for (auto& e : all) {
        for (const auto& err : spec.errors) e.guards.push_back(err.cond.negate());
        if (e.actions.empty()) {
            e.name = spec.name + "_noop_" + std::to_string(++empty);
            t.dropped.push_back(std::move(e));
        } else {
            e.name = spec.name + "_" + std::to_string(++kept);
            t.events.push_back(std::move(e));
        }
    }
    return t;
}

namespace {

using Atoms = std::map<std::string, std::size_t>;

void collect(Atoms& atoms, const std::vector<ProtoEvent>& evts) {
    for (const auto& e : evts) {
        for (const auto& g : e.guards) atoms.emplace(g.atom, atoms.size());
    }
}

bool holds(const Cond& c, const Atoms& atoms, std::uint64_t assignment) {
    const bool v = ((assignment >> atoms.at(c.atom)) & 1U) != 0;
    return v != c.negated;
}

bool enabled(const ProtoEvent& e, const Atoms& atoms, std::uint64_t assignment) {
    return std::all_of(e.guards.begin(), e.guards.end(), [&](const Cond& c) { return holds(c, atoms, assignment); });
}

constexpr std::size_t max_atoms = 24;

}  // namespace

bool check_disjointness(const std::vector<ProtoEvent>& events) {
    Atoms atoms;
    collect(atoms, events);
    if (atoms.size() > max_atoms) throw std::length_error("too many distinct conditions to enumerate");
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << atoms.size()); ++a) {
        int n = 0;
        for (const auto& e : events) n += enabled(e, atoms, a) ? 1 : 0;
        if (n > 1) return false;
    }
    return true;
}

bool check_coverage(const Translation& t, const std::vector<ErrorClause>& errors) {
    Atoms atoms;
    collect(atoms, t.events);
    collect(atoms, t.dropped);
    for (const auto& e : errors) atoms.emplace(e.cond.atom, atoms.size());
    if (atoms.size() > max_atoms) throw std::length_error("too many distinct conditions to enumerate");
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << atoms.size()); ++a) {
        const bool error_case =
            std::any_of(errors.begin(), errors.end(), [&](const ErrorClause& e) { return holds(e.cond, atoms, a); });
        if (error_case) continue;
        int n = 0;
        for (const auto& e : t.events) n += enabled(e, atoms, a) ? 1 : 0;
        for (const auto& e : t.dropped) n += enabled(e, atoms, a) ? 1 : 0;
        if (n != 1) return false;
    }
    return true;
}

std::string format_events(const std::vector<ProtoEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        out += "event " + e.name + "\n  where\n";
        if (e.guards.empty()) out += "    true\n";
        for (std::size_t i = 0; i < e.guards.size(); ++i) {
            out += "    grd" + std::to_string(i + 1) + ": " + e.guards[i].text() + "\n";
        }
        out += "  then\n";
        for (std::size_t i = 0; i < e.actions.size(); ++i) {
            out += "    act" + std::to_string(i + 1) + ": " + e.actions[i] + "\n";
        }
        out += "end\n";
    }
    return out;
}

}  // namespace a653::dsl
