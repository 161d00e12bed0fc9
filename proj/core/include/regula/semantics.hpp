#pragma once

#include <regula/error.hpp>
#include <regula/model.hpp>

#include <string>
#include <variant>
#include <vector>

/// Meaning of set expressions and constraints over a fixed plan, and plan validation.
///
/// Every operator follows its set-theoretic definition over std::set values. The solver
/// has its own three-valued evaluator, which is tested against this one.
namespace regula::semantics
{
    struct EvalContext
    {
        const Regulation & regulation;
        const StudyPlan & plan;
        const ExamSpec * exam = nullptr;
        const ExamPlan * exam_plan = nullptr;

        [[nodiscard]] auto horizon() const noexcept -> int { return plan.horizon(); }

        /// Complement and the temporal operators range over M, plus E_p and E_s when an exam spec is present.
        [[nodiscard]] auto universe() const -> IdSet;

        /// Semesters in which an element occurs: S_i for modules, E_i for tasks.
        [[nodiscard]] auto occurs_in(const Id & element, int semester) const -> bool;
    };

    using Value = std::variant<IdSet, Family>;

    [[nodiscard]] auto eval_set(const SetExpr & expr, const EvalContext & ctx) -> Value;

    /// eval_set for expressions that must denote a flat set; throws EvalError otherwise.
    [[nodiscard]] auto eval_flat(const SetExpr & expr, const EvalContext & ctx) -> IdSet;

    [[nodiscard]] auto holds(const ConstraintExpr & c, const EvalContext & ctx) -> bool;

    /// Human-readable reason a constraint fails, naming one witness. Empty when it holds.
    [[nodiscard]] auto explain_failure(const ConstraintExpr & c, const EvalContext & ctx) -> std::string;

    [[nodiscard]] auto validate_study_plan(const Regulation & reg, const StudyPlan & plan) -> ValidationReport;

    /// Function a: the module sequence completed by an examination plan, each module
    /// as early as its (V, W) combinations allow.
    [[nodiscard]] auto induce(const ExamPlan & eplan, const ExamSpec & exam, const IdSet & modules) -> StudyPlan;

    struct LabelledConstraint
    {
        std::string label;
        ConstraintExpr constraint;
    };

    /// The module-completion constraints of an exam spec, one pair per module with options:
    /// any task of m in Ē implies Ē ∩ expand(e_p(m)) ∈ e_p(m), likewise for e_s(m).
    [[nodiscard]] auto module_completion_constraints(const Regulation & reg, const ExamSpec & exam)
        -> std::vector<LabelledConstraint>;

    /// W ⊆ Ē implies some V ∈ X with V ⊆ Ē and max{i | V∩E_i≠∅} ≤ min{i | W∩E_i≠∅}.
    /// Empty V has max 0; empty W has min +∞.
    [[nodiscard]] auto dependency_holds(const Dependency & dep, const ExamPlan & eplan) -> bool;

    [[nodiscard]] auto validate_exam_plan(const Regulation & reg, const ExamSpec & exam, const ExamPlan & eplan)
        -> ValidationReport;
}
