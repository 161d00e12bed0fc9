#pragma once

// Compiled form of a solve request: element indexing, decision variables and constraints
// rewritten over must/may bitsets. Immutable once built; shared by sessions.

#include <regula/solver.hpp>

#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace regula::solver::detail
{
    using Word = std::uint64_t;
    using Words = std::vector<Word>;

    /// Semester domain of a decision variable: bit 0 is "not taken", bit i is semester i.
    using Domain = std::uint64_t;
    inline constexpr Domain none_bit = 1;

    [[nodiscard]] inline auto is_single(Domain d) noexcept -> bool { return d && ! (d & (d - 1)); }
    [[nodiscard]] inline auto lowest_semester(Domain d) noexcept -> int
    {
        d &= ~none_bit;
        return d ? std::countr_zero(d) : 0;
    }
    [[nodiscard]] inline auto highest_semester(Domain d) noexcept -> int
    {
        d &= ~none_bit;
        return d ? 63 - std::countl_zero(d) : 0;
    }

    enum class Truth : std::uint8_t
    {
        no,
        unknown,
        yes
    };

    [[nodiscard]] inline auto kleene_not(Truth t) noexcept -> Truth
    {
        return t == Truth::yes ? Truth::no : t == Truth::no ? Truth::yes : Truth::unknown;
    }

    [[nodiscard]] inline auto kleene_and(Truth a, Truth b) noexcept -> Truth
    {
        if (a == Truth::no || b == Truth::no)
            return Truth::no;
        if (a == Truth::yes && b == Truth::yes)
            return Truth::yes;
        return Truth::unknown;
    }

    [[nodiscard]] inline auto kleene_or(Truth a, Truth b) noexcept -> Truth
    {
        return kleene_not(kleene_and(kleene_not(a), kleene_not(b)));
    }

    /// Interval test of a comparison: yes when every value in [lo,hi] passes, no when none does.
    [[nodiscard]] auto compare(const Comparison & c, long long lo, long long hi) noexcept -> Truth;

    enum class Scope : std::uint8_t
    {
        study, ///< module rows only; `ee` is empty; complement relative to M
        exam   ///< module and task rows; complement relative to M ∪ E_p ∪ E_s
    };

    struct SetNode
    {
        SetOp op = SetOp::literal;
        Scope scope = Scope::study;
        int a = -1;
        int b = -1;
        SemesterIndex index;
        Words constant; ///< named, season, literal and expand-of-literal nodes
    };

    struct ConstraintNode
    {
        ConstraintOp op = ConstraintOp::empty;
        int a = -1; ///< set node
        int b = -1; ///< set node
        int p = -1; ///< constraint node
        int q = -1; ///< constraint node
        Comparison comparison;
        std::vector<long long> weights; ///< per element; sum only
        Words weighted;                 ///< elements carrying a weight; sum only
        std::vector<Words> family;      ///< in_family only
    };

    struct CompiledDependency
    {
        std::vector<std::vector<int>> options; ///< variables of each V ∈ X
        std::vector<int> primary;              ///< variables of W
    };

    struct CheckedAssumption
    {
        int element;
        int semester;
        Polarity polarity;
    };

    struct Problem
    {
        Mode mode = Mode::study;
        int horizon = 1;
        int words = 1;

        std::vector<Id> names;
        std::unordered_map<Id, int> index;
        Words module_mask;
        Words exam_universe;

        /// Element index of each decision variable, in branching order.
        std::vector<int> var_element;
        std::vector<Domain> root_domain;
        /// Variables ordered by element name.
        std::vector<int> vars_by_name;
        /// Variable of each element, -1 for elements that are not decided.
        std::vector<int> var_of;
        /// Elements that are decision variables; each occurs in at most one semester.
        Words var_mask;

        /// Exam mode: per module element, the variable lists of every (V ∪ W) combination.
        std::vector<std::pair<int, std::vector<std::vector<int>>>> module_combos;

        std::vector<SetNode> sets;
        std::vector<ConstraintNode> constraints;
        std::vector<int> roots;
        std::vector<std::string> root_labels;
        std::vector<CompiledDependency> dependencies;
        std::vector<CheckedAssumption> assumptions;

        std::optional<ExamSpec> exam;
        IdSet modules;

        [[nodiscard]] auto var_count() const noexcept -> int { return static_cast<int>(var_element.size()); }
    };

    /// Builds the compiled problem; applies assumptions as domain restrictions in study mode and
    /// as row checks in both modes; filters root domains by singleton consistency. The variables
    /// of modules in `first` (their tasks in exam mode) lead the branching order.
    [[nodiscard]] auto compile(const SolveRequest & request, const IdSet & first = {}) -> std::shared_ptr<Problem>;

    /// Scratch space and evaluation of a partial assignment.
    class Evaluator
    {
    public:
        explicit Evaluator(const Problem & problem);

        /// Worst truth value over all constraints of the problem (and the extra assumptions)
        /// under the given domains. Stops at the first `no`.
        [[nodiscard]] auto check(const std::vector<Domain> & domains, std::span<const CheckedAssumption> extra = {}) -> Truth;

        /// Narrows undecided domains against the sum constraints evaluated by the last check, which
        /// must have returned `unknown` on these domains. Returns false when a domain empties.
        [[nodiscard]] auto propagate(std::vector<Domain> & domains) -> bool;

        /// Index into Problem::roots of the constraint that failed the last check; -1 otherwise.
        [[nodiscard]] auto failed_root() const noexcept -> int { return _failed; }

    private:
        void build_rows(const std::vector<Domain> & domains);
        void eval_set(int node);
        /// Adds to `out` every variable whose domain lies within the semester mask `q`.
        /// Must and may union of the rows of semesters in `q`, restricted to `visible`.
        void rows_union(Domain q, const Word * visible, Word * mu, Word * ma);
        void confined(Domain q, Word * out, const Word * visible);
        auto eval_constraint(int node) -> Truth;
        auto dependency(const CompiledDependency & dep) -> Truth;

        /// Variable elements whose domain contains value bit `b`.
        auto has(int b) -> Word * { return &_has[b * _w]; }
        auto row_must(int semester) -> Word * { return &_rows[(2 * semester) * _w]; }
        auto row_may(int semester) -> Word * { return &_rows[(2 * semester + 1) * _w]; }
        auto must(int node) -> Word * { return &_slots[(2 * node) * _w]; }
        auto may(int node) -> Word * { return &_slots[(2 * node + 1) * _w]; }

        const Problem & _p;
        int _w;
        const std::vector<Domain> * _domains = nullptr;
        Words _rows;
        Words _slots;
        Words _tmp;
        Words _has;
        std::vector<Domain> _last; ///< domains reflected in _has
        std::vector<Domain> _semester_mask;
        /// Exam mode: modules with a combination whose tasks are all certainly taken, and the
        /// possible occurrence semesters per entry of Problem::module_combos.
        Words _taken;
        std::vector<Domain> _occ;
        std::vector<Domain> _witnesses;
        std::vector<int> _dynamic; ///< non-constant set nodes, children first
        /// Root sums whose set is a core set, optionally intersected with a constant. A core set is the
        /// plan union, or in study mode a semester, before or after set; membership of a module then
        /// coincides with its semester lying in a mask known at propagation time.
        struct Propagated
        {
            int constraint;
            int core;
            Words members;
        };
        std::vector<Propagated> _sums;
        /// Before/after nodes: the extreme witness semester when certain, -1 otherwise.
        std::vector<int> _extreme;
        /// Exam mode: entry of Problem::module_combos per element, -1 for none; task variables per entry.
        std::vector<int> _combo_of;
        std::vector<std::vector<int>> _task_vars;
        int _failed = -1;
    };

    /// Resumable depth-first enumeration over the static variable order.
    class Search
    {
    public:
        Search(std::shared_ptr<const Problem> problem, std::uint64_t seed, std::uint64_t node_budget);

        [[nodiscard]] auto next() -> std::optional<std::vector<Domain>>;
        [[nodiscard]] auto exhausted() const noexcept -> bool { return _exhausted; }
        [[nodiscard]] auto budget_exhausted() const noexcept -> bool { return _budget_hit; }
        [[nodiscard]] auto nodes() const noexcept -> std::uint64_t { return _nodes; }

        /// Adds an assumption before the search starts (domain restriction in study mode, row check in exam mode).
        void assume(const Assumption & assumption);

    private:
        std::shared_ptr<const Problem> _problem;
        Evaluator _eval;
        std::vector<Domain> _root;
        std::vector<Domain> _domains;
        std::vector<CheckedAssumption> _extra;
        std::vector<std::vector<Domain>> _values; ///< candidate values per depth, in try order
        std::vector<std::vector<Domain>> _saved;  ///< domains on entering each depth
        std::vector<std::size_t> _cursor;
        int _depth = 0;
        static constexpr int unbounded = 1 << 30;
        /// Depth from which every assignment is known to extend to a solution.
        int _free_depth = unbounded;
        bool _started = false;
        bool _exhausted = false;
        bool _budget_hit = false;
        std::uint64_t _budget;
        std::uint64_t _nodes = 0;
        std::uint64_t _seed;
    };

    /// Converts a complete assignment into plans.
    [[nodiscard]] auto to_solution(const Problem & problem, const std::vector<Domain> & domains) -> Solution;
}
