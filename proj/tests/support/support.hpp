#pragma once

#include <regula/dsl.hpp>
#include <regula/model.hpp>
#include <regula/solver.hpp>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace regula::testing
{
    [[nodiscard]] auto data_dir() -> std::filesystem::path;
    [[nodiscard]] auto read_file(const std::filesystem::path & path) -> std::string;
    /// Parses data files in order as one fact file.
    [[nodiscard]] auto load(const std::vector<std::string> & names) -> dsl::Instance;

    [[nodiscard]] auto cogsys() -> dsl::Instance;
    [[nodiscard]] auto cogsys_with_exams() -> dsl::Instance;
    [[nodiscard]] auto toy() -> dsl::Instance;

    /// Reference plan of the cogsys instance: the four semesters of the worked example.
    [[nodiscard]] auto cogsys_plan() -> StudyPlan;

    [[nodiscard]] auto request(const dsl::Instance & instance, int horizon, solver::Mode mode = solver::Mode::study)
        -> solver::SolveRequest;

    /// Solutions sorted, for set comparison.
    [[nodiscard]] auto sorted(std::vector<solver::Solution> solutions) -> std::vector<solver::Solution>;

    /// Per-semester intersection and union of the study plans; the report of an empty list is unsatisfiable.
    [[nodiscard]] auto aggregate(const std::vector<solver::Solution> & solutions, int horizon) -> ConsequenceReport;

    /// Independent enumeration: recursion over decision elements, validators as the judge.
    [[nodiscard]] auto enumerate(const solver::SolveRequest & request) -> std::vector<solver::Solution>;

    struct CaseOutcome
    {
        bool ok = true;
        std::string detail;
        std::size_t solutions = 0;
        /// Fact text, horizon and assumptions of the case.
        std::string instance;
    };

    /// One oracle-equivalence case: a generated instance (with an exam spec in exam mode) and
    /// random assumptions; solve, brute_force_oracle and enumerate must agree, and consequences
    /// must equal the oracle's per-semester intersection and union.
    [[nodiscard]] auto oracle_case(std::uint64_t seed, bool exam_mode) -> CaseOutcome;

    struct GeneratorOptions
    {
        int max_modules = 6;
        int max_horizon = 3;
        int max_extra_constraints = 3;
        int max_tasks = 6;
    };

    /// Random well-formed instances for property tests. Deterministic per seed.
    class Generator
    {
    public:
        explicit Generator(std::uint64_t seed, GeneratorOptions options = {});

        [[nodiscard]] auto horizon() -> int;
        [[nodiscard]] auto regulation() -> Regulation;
        /// An exam spec over `reg` with at most max_tasks tasks; adds exam-scope constraints.
        [[nodiscard]] auto exam(const Regulation & reg) -> ExamSpec;
        /// A random assumption over the modules of `reg`.
        [[nodiscard]] auto assumption(const Regulation & reg, int horizon) -> Assumption;

        [[nodiscard]] auto pick(int lo, int hi) -> int;
        [[nodiscard]] auto chance(double p) -> bool;

    private:
        auto subset(const std::vector<Id> & pool, bool nonempty) -> IdSet;
        auto set_expr(int depth, bool exam) -> SetExpr;
        auto constraint(int depth, bool exam) -> ConstraintExpr;
        auto comparison(long long scale) -> Comparison;

        std::mt19937_64 _rng;
        GeneratorOptions _options;
        int _horizon = 1;
        std::vector<Id> _modules;
        std::vector<Id> _sets;
        std::vector<Id> _tasks;
        long long _credit_total = 0;
    };
}
