#pragma once

#include <regula/expr.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace regula
{
    /// Reserved set names of the fact language.
    namespace reserved
    {
        inline constexpr const char * modules = "m";
        inline constexpr const char * groups = "g";
        inline constexpr const char * primary_tasks = "exam_p";
        inline constexpr const char * secondary_tasks = "exam_s";
        inline constexpr const char * dependencies = "d";
    }

    /// A basic study regulation (modules, groups, credits, turnus, credit bounds, constraints).
    ///
    /// Groups and auxiliary sets share one namespace in `sets`. The module set itself is
    /// addressed as the set `m` and is held in `modules`, never in `sets`.
    struct Regulation
    {
        IdSet modules;
        std::map<Id, IdSet> sets;
        IdSet groups;
        std::map<Id, long long> credits;
        std::map<Id, Turnus> turnus;
        std::map<Id, long long> lower;
        std::map<Id, long long> upper;
        /// Integer maps other than c/l/u, addressable from `sum/4`.
        std::map<Id, std::map<Id, long long>> functions;
        std::vector<ConstraintExpr> global_constraints;
        std::vector<ConstraintExpr> temporal_constraints;

        /// Resolves a set name, including `m`. Nullptr when undeclared.
        [[nodiscard]] auto find_set(const Id & name) const -> const IdSet *;

        /// Resolves an integer map by name (`c`, `l`, `u` or a declared function).
        [[nodiscard]] auto find_function(const Id & name) const -> std::optional<std::map<Id, long long>>;

        [[nodiscard]] auto modules_of_season(Turnus t) const -> IdSet;

        friend auto operator==(const Regulation &, const Regulation &) -> bool = default;
    };

    enum class TaskKind : std::uint8_t
    {
        primary,
        secondary
    };

    /// A dependency (X, W): some V in X must be completed no later than the first semester touching W.
    struct Dependency
    {
        Family secondary_options;
        IdSet primary;

        friend auto operator==(const Dependency &, const Dependency &) -> bool = default;
    };

    struct ExamSpec
    {
        IdSet primary_tasks;
        IdSet secondary_tasks;
        std::map<Id, Family> primary_options;   ///< e_p
        std::map<Id, Family> secondary_options; ///< e_s
        std::vector<Dependency> dependencies;
        std::vector<ConstraintExpr> global_constraints;
        std::vector<ConstraintExpr> temporal_constraints;

        [[nodiscard]] auto kind_of(const Id & task) const -> std::optional<TaskKind>;

        /// The module owning a task through e_p or e_s, if any.
        [[nodiscard]] auto owner_of(const Id & task) const -> std::optional<Id>;

        /// Every task named in e_p(m) or e_s(m).
        [[nodiscard]] auto tasks_of(const Id & module) const -> IdSet;

        friend auto operator==(const ExamSpec &, const ExamSpec &) -> bool = default;
    };

    struct StudyPlan
    {
        std::vector<IdSet> semesters;

        [[nodiscard]] auto horizon() const noexcept -> int { return static_cast<int>(semesters.size()); }
        [[nodiscard]] auto all_modules() const -> IdSet;

        friend auto operator==(const StudyPlan &, const StudyPlan &) -> bool = default;
        friend auto operator<=>(const StudyPlan &, const StudyPlan &) = default;
    };

    struct ExamPlan
    {
        std::vector<IdSet> semesters;

        [[nodiscard]] auto horizon() const noexcept -> int { return static_cast<int>(semesters.size()); }
        [[nodiscard]] auto all_tasks() const -> IdSet;

        friend auto operator==(const ExamPlan &, const ExamPlan &) -> bool = default;
        friend auto operator<=>(const ExamPlan &, const ExamPlan &) = default;
    };

    enum class Polarity : std::uint8_t
    {
        assigned,
        excluded
    };

    struct Assumption
    {
        Id module;
        int semester = 1;
        Polarity polarity = Polarity::assigned;

        friend auto operator==(const Assumption &, const Assumption &) -> bool = default;
    };

    struct Violation
    {
        std::string constraint;
        std::string reason;

        friend auto operator==(const Violation &, const Violation &) -> bool = default;
    };

    struct ValidationReport
    {
        std::vector<Violation> violations;

        [[nodiscard]] auto admissible() const noexcept -> bool { return violations.empty(); }
    };

    struct SemesterConsequences
    {
        IdSet forced;
        IdSet possible;
        /// Cells (modules) whose status could not be settled within the node budget.
        IdSet unknown;

        friend auto operator==(const SemesterConsequences &, const SemesterConsequences &) -> bool = default;
    };

    struct ConsequenceReport
    {
        bool satisfiable = false;
        bool complete = true;
        std::vector<SemesterConsequences> semesters;

        friend auto operator==(const ConsequenceReport &, const ConsequenceReport &) -> bool = default;
    };

    /// Reports every violated type-level side condition of a regulation (and exam spec).
    [[nodiscard]] auto check_wellformed(const Regulation & reg, const ExamSpec * exam = nullptr) -> ValidationReport;

    [[nodiscard]] auto to_string(const ValidationReport &) -> std::string;
}
