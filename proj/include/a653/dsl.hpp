#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace a653::dsl {

/// Opaque boolean atom, possibly negated. Negating twice gives the atom back.
struct Cond {
    std::string atom;
    bool negated = false;

    [[nodiscard]] Cond negate() const { return Cond{atom, !negated}; }
    [[nodiscard]] std::string text() const { return negated ? "not (" + atom + ")" : atom; }
    auto operator<=>(const Cond&) const = default;
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
    enum class Kind : std::uint8_t { Act, Seq, If, IfElse };
    Kind kind = Kind::Act;
    std::string act;  ///< Act
    Cond cond;        ///< If, IfElse
    StmtPtr first;    ///< Seq left, If/IfElse then-branch
    StmtPtr second;   ///< Seq right, IfElse else-branch
};

StmtPtr act(std::string text);
StmtPtr seq(StmtPtr a, StmtPtr b);
StmtPtr if_then(Cond c, StmtPtr body);
StmtPtr if_then_else(Cond c, StmtPtr then_branch, StmtPtr else_branch);

[[nodiscard]] bool equal(const StmtPtr& a, const StmtPtr& b);
/// Number of If/IfElse nodes.
[[nodiscard]] int count_ifs(const StmtPtr& s);

enum class ParamMode : std::uint8_t { In, Out, InOut };

struct Param {
    std::string name;
    ParamMode mode = ParamMode::In;
    std::string type;
    bool operator==(const Param&) const = default;
};

struct ErrorClause {
    Cond cond;
    std::string return_code;
    bool operator==(const ErrorClause&) const = default;
};

struct ServiceSpec {
    std::string name;
    std::vector<Param> params;
    std::vector<ErrorClause> errors;
    StmtPtr normal;  ///< null when the normal part is empty
};

[[nodiscard]] bool equal(const ServiceSpec& a, const ServiceSpec& b);

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, std::string message, std::vector<std::string> expected);
    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] int column() const { return column_; }
    [[nodiscard]] const std::vector<std::string>& expected() const { return expected_; }

private:
    int line_;
    int column_;
    std::vector<std::string> expected_;
};

ServiceSpec parse_service(std::string_view text);
/// Parses a bare statement sequence (a listing excerpt).
StmtPtr parse_statements(std::string_view text);

std::string pretty(const ServiceSpec& spec);
std::string pretty(const StmtPtr& s, int indent = 1);

struct ProtoEvent {
    std::string name;
    std::vector<Cond> guards;
    std::vector<std::string> actions;
    bool operator==(const ProtoEvent&) const = default;
};

struct Translation {
    std::vector<ProtoEvent> events;
    /// Events removed for having no action, kept for coverage checks.
    std::vector<ProtoEvent> dropped;
};

std::vector<ProtoEvent> translate(std::vector<ProtoEvent> evts, const StmtPtr& stmt);
Translation translate_service(const ServiceSpec& spec);

/// True when no truth assignment of the atoms enables two events.
[[nodiscard]] bool check_disjointness(const std::vector<ProtoEvent>& events);

/// True when, under every assignment making all error conditions false,
/// exactly one event (surviving or dropped) is enabled.
[[nodiscard]] bool check_coverage(const Translation& t, const std::vector<ErrorClause>& errors);

std::string format_events(const std::vector<ProtoEvent>& events);

}  // namespace a653::dsl
