#pragma once

#include <regula/error.hpp>
#include <regula/model.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace regula::solver
{
    enum class Mode : std::uint8_t
    {
        study,
        exam
    };

    struct SolveRequest
    {
        Regulation regulation;
        std::optional<ExamSpec> exam;
        int horizon = 1;
        std::vector<Assumption> assumptions;
        /// 0 means unlimited.
        std::size_t model_limit = 0;
        Mode mode = Mode::study;
        /// 0 keeps the canonical value order; any other seed permutes it deterministically.
        std::uint64_t seed = 0;
        /// Search nodes allowed per query; 0 means unlimited.
        std::uint64_t node_budget = 0;
    };

    /// Largest horizon the solver accepts.
    inline constexpr int max_horizon = 62;

    struct Solution
    {
        StudyPlan plan;
        std::optional<ExamPlan> exam_plan;

        friend auto operator==(const Solution &, const Solution &) -> bool = default;
        friend auto operator<=>(const Solution &, const Solution &) = default;
    };

    enum class Outcome : std::uint8_t
    {
        complete,        ///< every solution up to the model limit was produced
        budget_exhausted ///< the node budget ran out; absence of further solutions is unknown
    };

    struct SolveResult
    {
        std::vector<Solution> solutions;
        Outcome outcome = Outcome::complete;
        std::uint64_t nodes = 0;

        [[nodiscard]] auto unknown() const noexcept -> bool { return outcome == Outcome::budget_exhausted; }
        [[nodiscard]] auto unsatisfiable() const noexcept -> bool { return solutions.empty() && ! unknown(); }
    };

    namespace detail
    {
        struct Problem;
        class Search;
    }

    /// Resumable enumeration of admissible plans in a deterministic order.
    /// Single owner; distinct sessions may run on distinct threads.
    class SolveSession
    {
    public:
        explicit SolveSession(const SolveRequest & request);
        ~SolveSession();
        SolveSession(SolveSession &&) noexcept;
        auto operator=(SolveSession &&) noexcept -> SolveSession &;

        /// The next plan, or nullopt once exhausted (or once the node budget runs out).
        [[nodiscard]] auto next() -> std::optional<Solution>;

        [[nodiscard]] auto exhausted() const noexcept -> bool;
        [[nodiscard]] auto budget_exhausted() const noexcept -> bool;
        [[nodiscard]] auto nodes() const noexcept -> std::uint64_t;

    private:
        std::shared_ptr<const detail::Problem> _problem;
        std::unique_ptr<detail::Search> _search;
    };

    [[nodiscard]] auto solve(const SolveRequest & request) -> SolveResult;

    /// Forced (cautious) and possible (brave) module/semester cells under the request's assumptions.
    [[nodiscard]] auto consequences(const SolveRequest & request) -> ConsequenceReport;

    /// Decision variables in canonical branching order: modules by descending credits then name
    /// (study mode), or tasks grouped by owning module in that order then by name (exam mode).
    [[nodiscard]] auto decision_order(const SolveRequest & request) -> std::vector<Id>;

    /// Throws RequestError when the request is malformed.
    void check_request(const SolveRequest & request);

    inline constexpr std::uint64_t default_oracle_cap = 10'000'000;

    /// Exhaustive enumeration of every assignment of each decision variable to {1..n, none},
    /// filtered by the plan validators. Solutions come in the canonical order shared with
    /// SolveSession at seed 0. Throws RequestError when (n+1)^vars exceeds the cap.
    [[nodiscard]] auto brute_force_oracle(const SolveRequest & request, std::uint64_t cap = default_oracle_cap)
        -> std::vector<Solution>;
}
