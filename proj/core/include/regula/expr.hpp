#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace regula
{
    /// Elements of sets are untyped symbols: modules, examination tasks, group names.
    using Id = std::string;
    using IdSet = std::set<Id>;
    using Family = std::set<IdSet>;

    enum class Turnus : std::uint8_t
    {
        winter,
        summer,
        every
    };

    [[nodiscard]] auto turnus_code(Turnus) -> char;

    /// Semester selector of `s(I)`. `even`/`odd` range over every semester of that parity up to the horizon.
    struct SemesterIndex
    {
        enum class Kind : std::uint8_t
        {
            single,
            even,
            odd
        };

        Kind kind = Kind::single;
        int value = 1;

        [[nodiscard]] auto selects(int semester) const noexcept -> bool;
        auto operator<=>(const SemesterIndex &) const = default;
    };

    enum class SetOp : std::uint8_t
    {
        named,       ///< a declared set or group
        plan_union,  ///< `s`
        semester,    ///< `s(i)`
        season,      ///< `m(w)`, `m(s)`
        exam_union,  ///< `ee`
        repeated,    ///< modules occurring in two or more semesters
        intersect,
        unite,
        difference,
        complement,
        before,
        after,
        between,
        expand,
        literal,
        family
    };

    struct SetExpr
    {
        SetOp op = SetOp::literal;
        Id name;
        SemesterIndex index;
        Turnus season = Turnus::winter;
        IdSet elements;
        Family members;
        std::vector<SetExpr> args;

        [[nodiscard]] static auto named(Id name) -> SetExpr;
        [[nodiscard]] static auto plan_union() -> SetExpr;
        [[nodiscard]] static auto semester(int i) -> SetExpr;
        [[nodiscard]] static auto semesters(SemesterIndex::Kind parity) -> SetExpr;
        [[nodiscard]] static auto season_set(Turnus t) -> SetExpr;
        [[nodiscard]] static auto exam_union() -> SetExpr;
        [[nodiscard]] static auto repeated() -> SetExpr;
        [[nodiscard]] static auto intersect(SetExpr a, SetExpr b) -> SetExpr;
        [[nodiscard]] static auto unite(SetExpr a, SetExpr b) -> SetExpr;
        [[nodiscard]] static auto difference(SetExpr a, SetExpr b) -> SetExpr;
        [[nodiscard]] static auto complement(SetExpr a) -> SetExpr;
        [[nodiscard]] static auto before(SetExpr a) -> SetExpr;
        [[nodiscard]] static auto after(SetExpr a) -> SetExpr;
        [[nodiscard]] static auto between(SetExpr a, SetExpr b) -> SetExpr;
        [[nodiscard]] static auto expand(SetExpr f) -> SetExpr;
        [[nodiscard]] static auto literal(IdSet elements) -> SetExpr;
        [[nodiscard]] static auto family(Family members) -> SetExpr;

        /// True for expressions denoting a set of sets.
        [[nodiscard]] auto is_family() const noexcept -> bool { return op == SetOp::family; }

        friend auto operator==(const SetExpr &, const SetExpr &) -> bool = default;
    };

    enum class CompareOp : std::uint8_t
    {
        leq,
        geq,
        eq,
        lt,
        gt,
        bw
    };

    struct Comparison
    {
        CompareOp op = CompareOp::eq;
        long long bound = 0;
        long long upper = 0; ///< only meaningful for `bw`

        [[nodiscard]] auto accepts(long long value) const noexcept -> bool;
        friend auto operator==(const Comparison &, const Comparison &) -> bool = default;
    };

    enum class ConstraintOp : std::uint8_t
    {
        empty,
        equal,
        subseteq,
        subset,
        supseteq,
        supset,
        card,
        sum,
        implies,
        neg,
        in_family
    };

    struct ConstraintExpr
    {
        ConstraintOp op = ConstraintOp::empty;
        std::vector<SetExpr> sets;
        Id function;
        Comparison comparison;
        std::vector<ConstraintExpr> args;

        [[nodiscard]] static auto empty(SetExpr a) -> ConstraintExpr;
        [[nodiscard]] static auto equal(SetExpr a, SetExpr b) -> ConstraintExpr;
        [[nodiscard]] static auto subseteq(SetExpr a, SetExpr b) -> ConstraintExpr;
        [[nodiscard]] static auto subset(SetExpr a, SetExpr b) -> ConstraintExpr;
        [[nodiscard]] static auto supseteq(SetExpr a, SetExpr b) -> ConstraintExpr;
        [[nodiscard]] static auto supset(SetExpr a, SetExpr b) -> ConstraintExpr;
        [[nodiscard]] static auto card(SetExpr a, Comparison c) -> ConstraintExpr;
        [[nodiscard]] static auto sum(SetExpr a, Id function, Comparison c) -> ConstraintExpr;
        [[nodiscard]] static auto implies(ConstraintExpr p, ConstraintExpr q) -> ConstraintExpr;
        [[nodiscard]] static auto neg(ConstraintExpr p) -> ConstraintExpr;
        [[nodiscard]] static auto in_family(SetExpr a, SetExpr f) -> ConstraintExpr;

        friend auto operator==(const ConstraintExpr &, const ConstraintExpr &) -> bool = default;
    };

    [[nodiscard]] auto leq(long long bound) -> Comparison;
    [[nodiscard]] auto geq(long long bound) -> Comparison;
    [[nodiscard]] auto eq(long long bound) -> Comparison;
    [[nodiscard]] auto between_bounds(long long lower, long long upper) -> Comparison;

    /// Fact-language spelling of an expression, e.g. `int(s,o)` or `sum(before(tc4),c,geq,90)`.
    [[nodiscard]] auto to_string(const SetExpr &) -> std::string;
    [[nodiscard]] auto to_string(const ConstraintExpr &) -> std::string;
    [[nodiscard]] auto to_string(const Comparison &) -> std::string;
    [[nodiscard]] auto to_string(CompareOp) -> std::string;
    [[nodiscard]] auto to_string(const IdSet &) -> std::string;
    [[nodiscard]] auto to_string(const Family &) -> std::string;
}
