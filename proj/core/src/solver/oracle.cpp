#include <regula/semantics.hpp>
#include <regula/solver.hpp>

namespace regula::solver
{
    namespace
    {
        auto meets(const StudyPlan & plan, const std::vector<Assumption> & assumptions) -> bool
        {
            for (const auto & a : assumptions) {
                const bool in = a.semester <= plan.horizon() && plan.semesters[a.semester - 1].contains(a.module);
                if (in != (a.polarity == Polarity::assigned))
                    return false;
            }
            return true;
        }
    }

    auto brute_force_oracle(const SolveRequest & request, std::uint64_t cap) -> std::vector<Solution>
    {
        check_request(request);
        const auto order = decision_order(request);
        const int n = request.horizon;
        const std::size_t vars = order.size();

        std::uint64_t total = 1;
        for (std::size_t i = 0; i < vars; ++i) {
            if (total > cap / static_cast<std::uint64_t>(n + 1))
                throw RequestError("oracle space exceeds the cap of " + std::to_string(cap) + " assignments");
            total *= static_cast<std::uint64_t>(n + 1);
        }

        // digit k < n means semester k+1; digit n means not taken. Variable 0 is the most significant.
        std::vector<int> digits(vars, 0);
        std::vector<Solution> out;
        for (std::uint64_t step = 0; step < total; ++step) {
            std::vector<IdSet> rows(n);
            for (std::size_t v = 0; v < vars; ++v)
                if (digits[v] < n)
                    rows[digits[v]].insert(order[v]);

            if (request.mode == Mode::study) {
                StudyPlan plan{std::move(rows)};
                if (meets(plan, request.assumptions) && semantics::validate_study_plan(request.regulation, plan).admissible())
                    out.push_back(Solution{std::move(plan), std::nullopt});
            }
            else {
                ExamPlan eplan{std::move(rows)};
                auto plan = semantics::induce(eplan, *request.exam, request.regulation.modules);
                if (meets(plan, request.assumptions)
                    && semantics::validate_exam_plan(request.regulation, *request.exam, eplan).admissible())
                    out.push_back(Solution{std::move(plan), std::move(eplan)});
            }

            for (std::size_t v = vars; v-- > 0;) {
                if (++digits[v] <= n)
                    break;
                digits[v] = 0;
            }
        }
        return out;
    }
}
