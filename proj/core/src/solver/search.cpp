#include "problem.hpp"

#include <regula/semantics.hpp>

#include <algorithm>
#include <random>

namespace regula::solver::detail
{
    Search::Search(std::shared_ptr<const Problem> problem, std::uint64_t seed, std::uint64_t node_budget) :
        _problem(std::move(problem)),
        _eval(*_problem),
        _root(_problem->root_domain),
        _budget(node_budget),
        _seed(seed)
    {
    }

    void Search::assume(const Assumption & assumption)
    {
        const Problem & p = *_problem;
        auto it = p.index.find(assumption.module);
        if (it == p.index.end() || assumption.semester < 1 || assumption.semester > p.horizon)
            throw RequestError("invalid assumption " + assumption.module + "@" + std::to_string(assumption.semester));
        _extra.push_back(CheckedAssumption{it->second, assumption.semester, assumption.polarity});
        if (p.mode == Mode::study) {
            const Domain bit = Domain{1} << assumption.semester;
            Domain & d = _root[p.var_of[it->second]];
            d = assumption.polarity == Polarity::assigned ? (d & bit) : (d & ~bit);
        }
    }

    auto Search::next() -> std::optional<std::vector<Domain>>
    {
        if (_exhausted || _budget_hit)
            return std::nullopt;
        const int vars = _problem->var_count();
        const int n = _problem->horizon;

        auto values_of = [&](int var) {
            std::vector<Domain> out;
            for (int i = 1; i <= n; ++i)
                out.push_back(Domain{1} << i);
            out.push_back(none_bit);
            if (_seed) {
                std::mt19937_64 rng(_seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(var + 1)));
                std::shuffle(out.begin(), out.end(), rng);
            }
            std::erase_if(out, [&](Domain v) { return ! (_root[var] & v); });
            return out;
        };
        auto spend = [&] {
            ++_nodes;
            if (_budget && _nodes > _budget) {
                _budget_hit = true;
                return false;
            }
            return true;
        };

        if (! _started) {
            _started = true;
            _domains = _root;
            if (! spend())
                return std::nullopt;
            const Truth root = _eval.check(_domains, _extra);
            if (root == Truth::no || (root == Truth::unknown && ! _eval.propagate(_domains)) || vars == 0) {
                _exhausted = true;
                if (vars == 0 && _eval.check(_domains, _extra) == Truth::yes)
                    return _domains;
                return std::nullopt;
            }
            _values.resize(vars);
            for (int v = 0; v < vars; ++v)
                _values[v] = values_of(v);
            _cursor.assign(vars, 0);
            _saved.assign(vars, _domains);
            _depth = 0;
        }

        while (_depth >= 0) {
            const std::vector<Domain> & saved = _saved[_depth];
            if (_cursor[_depth] == _values[_depth].size()) {
                --_depth;
                continue;
            }
            const Domain value = _values[_depth][_cursor[_depth]++];
            if (! (saved[_depth] & value))
                continue;
            _domains = saved;
            _domains[_depth] = value;
            if (_depth < _free_depth)
                _free_depth = unbounded;
            if (_depth < _free_depth && ! spend()) {
                --_cursor[_depth];
                return std::nullopt;
            }
            // Below a `yes` every completion is a solution; no further checks are needed.
            Truth t = _depth >= _free_depth ? Truth::yes : _eval.check(_domains, _extra);
            if (t == Truth::no)
                continue;
            if (t == Truth::yes && _depth < _free_depth)
                _free_depth = _depth + 1;
            if (t == Truth::unknown && ! _eval.propagate(_domains))
                continue;
            if (_depth == vars - 1) {
                if (t != Truth::yes)
                    throw Error("internal: undecided constraint under a complete assignment");
                return _domains;
            }
            ++_depth;
            _saved[_depth] = _domains;
            _cursor[_depth] = 0;
        }
        _exhausted = true;
        return std::nullopt;
    }

    auto to_solution(const Problem & problem, const std::vector<Domain> & domains) -> Solution
    {
        Solution out;
        std::vector<IdSet> rows(problem.horizon);
        for (int v : problem.vars_by_name) {
            int s = lowest_semester(domains[v]);
            if (s)
                rows[s - 1].emplace_hint(rows[s - 1].end(), problem.names[problem.var_element[v]]);
        }
        if (problem.mode == Mode::study) {
            out.plan.semesters = std::move(rows);
            return out;
        }
        ExamPlan eplan;
        eplan.semesters = std::move(rows);
        out.plan = semantics::induce(eplan, *problem.exam, problem.modules);
        out.exam_plan = std::move(eplan);
        return out;
    }
}

namespace regula::solver
{
    SolveSession::SolveSession(const SolveRequest & request) :
        _problem(detail::compile(request)),
        _search(std::make_unique<detail::Search>(_problem, request.seed, request.node_budget))
    {
    }

    SolveSession::~SolveSession() = default;
    SolveSession::SolveSession(SolveSession &&) noexcept = default;
    auto SolveSession::operator=(SolveSession &&) noexcept -> SolveSession & = default;

    auto SolveSession::next() -> std::optional<Solution>
    {
        auto d = _search->next();
        if (! d)
            return std::nullopt;
        return detail::to_solution(*_problem, *d);
    }

    auto SolveSession::exhausted() const noexcept -> bool { return _search->exhausted(); }
    auto SolveSession::budget_exhausted() const noexcept -> bool { return _search->budget_exhausted(); }
    auto SolveSession::nodes() const noexcept -> std::uint64_t { return _search->nodes(); }

    auto solve(const SolveRequest & request) -> SolveResult
    {
        SolveSession session(request);
        SolveResult result;
        while (request.model_limit == 0 || result.solutions.size() < request.model_limit) {
            auto s = session.next();
            if (! s)
                break;
            result.solutions.push_back(std::move(*s));
        }
        result.outcome = session.budget_exhausted() ? Outcome::budget_exhausted : Outcome::complete;
        result.nodes = session.nodes();
        return result;
    }
}
