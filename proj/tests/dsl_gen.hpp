#pragma once

#include <random>
#include <string>

#include "a653/dsl.hpp"

namespace testgen {

/// Random statement with at most `ifs` conditionals. Conditions are fresh
/// atoms, with an occasional repeat of an earlier one; branches may be
/// empty so that some paths carry no action.
class StmtGen {
public:
    explicit StmtGen(std::mt19937& rng) : rng_(rng) {}

    a653::dsl::StmtPtr make(int ifs) {
        int budget = ifs;
        return stmt(budget, 0);
    }

private:
    std::mt19937& rng_;
    int atoms_ = 0;
    int acts_ = 0;

    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    a653::dsl::Cond cond() {
        if (atoms_ > 0 && pick(0, 4) == 0) return {"c" + std::to_string(pick(1, atoms_)), pick(0, 1) == 1};
        return {"c" + std::to_string(++atoms_), false};
    }

    a653::dsl::StmtPtr stmt(int& budget, int depth) {
        using namespace a653::dsl;
        const int roll = pick(0, 9);
        if (budget > 0 && roll < 4 && depth < 6) {
            --budget;
            const Cond c = cond();
            auto then_branch = maybe(budget, depth + 1);
            if (pick(0, 1) == 0) return if_then(c, then_branch);
            return if_then_else(c, then_branch, maybe(budget, depth + 1));
        }
        if (roll < 7 && depth < 6) {
            auto a = stmt(budget, depth + 1);
            return seq(a, stmt(budget, depth + 1));
        }
        return act("a" + std::to_string(++acts_));
    }

    a653::dsl::StmtPtr maybe(int& budget, int depth) { return pick(0, 5) == 0 ? nullptr : stmt(budget, depth); }
};

inline a653::dsl::ServiceSpec random_service(std::mt19937& rng, int max_ifs) {
    a653::dsl::ServiceSpec s;
    s.name = "SVC";
    s.normal = StmtGen(rng).make(std::uniform_int_distribution<int>(0, max_ifs)(rng));
    const int errors = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int i = 1; i <= errors; ++i) s.errors.push_back({{"e" + std::to_string(i), false}, "INVALID_PARAM"});
    return s;
}

}  // namespace testgen
