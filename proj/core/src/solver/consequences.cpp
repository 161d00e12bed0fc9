#include "problem.hpp"

#include <regula/solver.hpp>

#include <algorithm>
#include <map>

namespace regula::solver
{
    namespace
    {
        // Module/semester cells of a solution, indexed [semester-1].
        auto cells(const Solution & s) -> std::vector<IdSet> { return s.plan.semesters; }

        auto excludes_repeats(const Regulation & reg) -> bool
        {
            auto is_rule = [](const ConstraintExpr & c) {
                return c.op == ConstraintOp::empty && c.sets.size() == 1 && c.sets[0].op == SetOp::repeated;
            };
            return std::ranges::any_of(reg.global_constraints, is_rule) ||
                std::ranges::any_of(reg.temporal_constraints, is_rule);
        }
    }

    auto consequences(const SolveRequest & request) -> ConsequenceReport
    {
        std::shared_ptr<const detail::Problem> problem = detail::compile(request);
        const int n = request.horizon;

        // Without repeated modules every induced plan is a study-mode solution of the same request,
        // so cells settled in study mode are settled in exam mode: not possible stays not possible,
        // forced stays forced.
        std::optional<ConsequenceReport> bound;
        if (request.mode == Mode::exam && excludes_repeats(request.regulation)) {
            SolveRequest relaxed = request;
            relaxed.mode = Mode::study;
            bound = consequences(relaxed);
            if (! bound->satisfiable && bound->complete)
                return *bound;
        }
        auto settled_out = [&](const Id & m, int i) {
            if (! bound || ! bound->satisfiable)
                return false;
            const auto & cell = bound->semesters[i - 1];
            return ! cell.possible.contains(m) && ! cell.unknown.contains(m);
        };
        auto settled_forced = [&](const Id & m, int i) {
            return bound && bound->satisfiable && bound->semesters[i - 1].forced.contains(m);
        };

        // Per-module problems that branch on the queried module first, so that a cell is refuted
        // near the root instead of below every other module.
        std::map<Id, std::shared_ptr<const detail::Problem>> leading;
        auto problem_for = [&](const Assumption * extra) {
            if (! extra)
                return problem;
            auto & p = leading[extra->module];
            if (! p)
                p = detail::compile(request, IdSet{extra->module});
            return p;
        };

        auto query = [&](const Assumption * extra, bool & budget_hit) -> std::optional<Solution> {
            auto problem = problem_for(extra);
            detail::Search search(problem, request.seed, request.node_budget);
            if (extra)
                search.assume(*extra);
            auto d = search.next();
            budget_hit = search.budget_exhausted();
            if (! d)
                return std::nullopt;
            return detail::to_solution(*problem, *d);
        };

        ConsequenceReport report;
        report.semesters.resize(n);

        bool budget_hit = false;
        auto first = query(nullptr, budget_hit);
        if (! first) {
            report.satisfiable = false;
            report.complete = ! budget_hit;
            if (budget_hit)
                for (auto & s : report.semesters)
                    s.unknown = request.regulation.modules;
            return report;
        }
        report.satisfiable = true;

        std::vector<IdSet> possible = cells(*first);
        std::vector<IdSet> forced = possible;
        auto absorb = [&](const Solution & s) {
            auto c = cells(s);
            for (int i = 0; i < n; ++i) {
                possible[i].insert(c[i].begin(), c[i].end());
                std::erase_if(forced[i], [&](const Id & m) { return ! c[i].contains(m); });
            }
        };

        std::vector<IdSet> unknown(n);
        for (int i = 1; i <= n; ++i)
            for (const auto & m : request.regulation.modules) {
                if (possible[i - 1].contains(m) || settled_out(m, i))
                    continue;
                Assumption a{m, i, Polarity::assigned};
                bool hit = false;
                if (auto s = query(&a, hit))
                    absorb(*s);
                else if (hit)
                    unknown[i - 1].insert(m);
            }

        for (int i = 1; i <= n; ++i) {
            const IdSet candidates = forced[i - 1];
            for (const auto & m : candidates) {
                if (! forced[i - 1].contains(m) || settled_forced(m, i))
                    continue;
                Assumption a{m, i, Polarity::excluded};
                bool hit = false;
                if (auto s = query(&a, hit))
                    absorb(*s);
                else if (hit) {
                    forced[i - 1].erase(m);
                    unknown[i - 1].insert(m);
                }
            }
        }

        for (int i = 0; i < n; ++i) {
            report.semesters[i].forced = std::move(forced[i]);
            report.semesters[i].possible = std::move(possible[i]);
            report.semesters[i].unknown = std::move(unknown[i]);
            if (! report.semesters[i].unknown.empty())
                report.complete = false;
        }
        return report;
    }
}
