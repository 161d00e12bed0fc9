#pragma once

#include <regula/error.hpp>
#include <regula/model.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

/// The fact-based regulation language and the plan file format.
///
/// Regulation files consist of `in(E,A).` membership facts, `map(F,E,V).` function entries
/// and constraint facts, with `%` line comments. Pooling with `;` inside any parenthesised
/// list expands to the cross product of alternatives. Constraint facts are routed by the
/// most recent section directive (`#global.`, `#temporal.`, `#exam_global.`, `#exam_temporal.`);
/// before any directive they are global.
namespace regula::dsl
{
    struct Term
    {
        enum class Kind : std::uint8_t
        {
            symbol,
            integer,
            tuple,
            function,
            set,
            pool
        };

        Kind kind = Kind::symbol;
        std::string name;
        long long number = 0;
        /// Tuple elements, function arguments, set members or pool alternatives.
        std::vector<Term> args;
        std::size_t line = 0;
        std::size_t column = 0;

        /// Structural equality, ignoring source positions.
        friend auto operator==(const Term & a, const Term & b) -> bool;
    };

    [[nodiscard]] auto to_string(const Term &) -> std::string;

    /// Parses a single term, e.g. `((a;b),(1;2))`.
    [[nodiscard]] auto parse_term(std::string_view text) -> Term;

    /// Cross-product expansion of every pool in the term, left-to-right.
    [[nodiscard]] auto expand_pool(const Term & term) -> std::vector<Term>;
    [[nodiscard]] auto expand_pool(std::string_view text) -> std::vector<Term>;

    enum class Section : std::uint8_t
    {
        global,
        temporal,
        exam_global,
        exam_temporal
    };

    struct Fact
    {
        enum class Kind : std::uint8_t
        {
            membership,
            map_entry,
            constraint
        };

        Kind kind = Kind::membership;
        Term element;     ///< membership element / map argument
        Id target;        ///< membership set name / map function name
        Term value;       ///< map value
        ConstraintExpr constraint;
        Section section = Section::global;
        std::size_t line = 0;
        std::size_t column = 0;

        friend auto operator==(const Fact & a, const Fact & b) -> bool;
    };

    /// Ground facts in source order, after pool expansion.
    struct FactFile
    {
        std::vector<Fact> facts;

        friend auto operator==(const FactFile &, const FactFile &) -> bool = default;
    };

    [[nodiscard]] auto parse_facts(std::string_view text) -> FactFile;

    struct Instance
    {
        Regulation regulation;
        std::optional<ExamSpec> exam;
    };

    [[nodiscard]] auto assemble(const FactFile & facts) -> Instance;

    /// parse_facts followed by assemble.
    [[nodiscard]] auto parse_instance(std::string_view text) -> Instance;

    /// Canonical fact-file text. Empty auxiliary sets have no surface form and are dropped.
    [[nodiscard]] auto serialize(const Regulation & reg, const ExamSpec * exam = nullptr) -> std::string;
    [[nodiscard]] auto serialize(const Instance & instance) -> std::string;

    /// Plan file: one line `i: id1 id2 ...` per semester, numbered from 1.
    /// When a regulation is given, every id must be a declared module (study plan)
    /// or a declared task (exam plan).
    [[nodiscard]] auto parse_study_plan(std::string_view text, const Regulation * reg = nullptr) -> StudyPlan;
    [[nodiscard]] auto parse_exam_plan(std::string_view text, const ExamSpec * exam = nullptr) -> ExamPlan;

    [[nodiscard]] auto serialize(const StudyPlan &) -> std::string;
    [[nodiscard]] auto serialize(const ExamPlan &) -> std::string;

    /// `(module,semester)` pairs, semester first then name.
    [[nodiscard]] auto format_pairs(const StudyPlan &) -> std::string;
}
