#include "problem.hpp"

#include <algorithm>
#include <limits>

namespace regula::solver::detail
{
    namespace
    {
        auto any(const Word * w, int n) -> bool
        {
            for (int i = 0; i < n; ++i)
                if (w[i])
                    return true;
            return false;
        }

        auto count(const Word * w, int n) -> long long
        {
            long long c = 0;
            for (int i = 0; i < n; ++i)
                c += std::popcount(w[i]);
            return c;
        }

        auto test(const Word * w, int bit) -> bool { return (w[bit / 64] >> (bit % 64)) & 1; }
        void set(Word * w, int bit) { w[bit / 64] |= Word{1} << (bit % 64); }

        // Whether (a & ~b) has any bit.
        auto escapes(const Word * a, const Word * b, int n) -> bool
        {
            for (int i = 0; i < n; ++i)
                if (a[i] & ~b[i])
                    return true;
            return false;
        }

        template <typename F>
        void for_each_bit(const Word * w, int n, F f)
        {
            for (int i = 0; i < n; ++i)
                for (Word x = w[i]; x; x &= x - 1)
                    f(i * 64 + std::countr_zero(x));
        }
    }

    Evaluator::Evaluator(const Problem & problem) :
        _p(problem),
        _w(problem.words),
        _rows(static_cast<std::size_t>(2 * (problem.horizon + 1) * problem.words), 0),
        _slots(static_cast<std::size_t>(2 * problem.sets.size() * problem.words), 0),
        _tmp(static_cast<std::size_t>(4 * problem.words), 0),
        _has(static_cast<std::size_t>((problem.horizon + 1) * problem.words), 0),
        _last(problem.var_element.size(), 0),
        _semester_mask(problem.sets.size(), 0),
        _taken(static_cast<std::size_t>(problem.words), 0),
        _occ(problem.module_combos.size(), 0)
    {
        for (int node = 0; node < static_cast<int>(problem.sets.size()); ++node) {
            const SetNode & s = problem.sets[node];
            if (s.op == SetOp::literal) {
                std::copy(s.constant.begin(), s.constant.end(), must(node));
                std::copy(s.constant.begin(), s.constant.end(), may(node));
            }
            else {
                _dynamic.push_back(node);
            }
            for (int i = 1; i <= problem.horizon; ++i)
                if (s.op == SetOp::semester && s.index.selects(i))
                    _semester_mask[node] |= Domain{1} << i;
        }

        _combo_of.assign(problem.names.size(), -1);
        _task_vars.resize(problem.module_combos.size());
        for (std::size_t k = 0; k < problem.module_combos.size(); ++k) {
            const auto & [module, combos] = problem.module_combos[k];
            _combo_of[module] = static_cast<int>(k);
            for (const auto & vars : combos)
                _task_vars[k].insert(_task_vars[k].end(), vars.begin(), vars.end());
            std::sort(_task_vars[k].begin(), _task_vars[k].end());
            _task_vars[k].erase(std::unique(_task_vars[k].begin(), _task_vars[k].end()), _task_vars[k].end());
        }

        _extreme.assign(problem.sets.size(), -1);
        for (int root : problem.roots) {
            const ConstraintNode & c = problem.constraints[root];
            if (c.op != ConstraintOp::sum)
                continue;
            // Study mode also covers semester-bounded sets; exam mode decides tasks, not modules.
            auto is_core = [&](int node) {
                const SetNode & s = problem.sets[node];
                if (s.op == SetOp::plan_union)
                    return true;
                return problem.mode == Mode::study && s.scope == Scope::study &&
                    (s.op == SetOp::semester || s.op == SetOp::before || s.op == SetOp::after);
            };
            auto is_constant = [&](int node) { return problem.sets[node].op == SetOp::literal; };
            const SetNode & a = problem.sets[c.a];
            Words members = problem.module_mask;
            int core = -1;
            if (is_core(c.a)) {
                core = c.a;
            }
            else if (a.op == SetOp::intersect && is_core(a.a) && is_constant(a.b)) {
                core = a.a;
                for (int w = 0; w < _w; ++w)
                    members[w] &= problem.sets[a.b].constant[w];
            }
            else if (a.op == SetOp::intersect && is_core(a.b) && is_constant(a.a)) {
                core = a.b;
                for (int w = 0; w < _w; ++w)
                    members[w] &= problem.sets[a.a].constant[w];
            }
            if (core >= 0)
                _sums.push_back({root, core, std::move(members)});
        }
    }

    void Evaluator::confined(Domain q, Word * out, const Word * visible)
    {
        for (int w = 0; w < _w; ++w) {
            Word outside = 0;
            for (int b = 0; b <= _p.horizon; ++b)
                if (! (q & (Domain{1} << b)))
                    outside |= has(b)[w];
            out[w] |= visible[w] & _p.var_mask[w] & ~outside;
        }
    }

    void Evaluator::rows_union(Domain q, const Word * visible, Word * mu, Word * ma)
    {
        for (int w = 0; w < _w; ++w) {
            Word m = 0;
            Word y = 0;
            for (int i = 1; i <= _p.horizon; ++i)
                if (q & (Domain{1} << i)) {
                    m |= row_must(i)[w];
                    y |= row_may(i)[w];
                }
            mu[w] = m & visible[w];
            ma[w] = y & visible[w];
        }
        // A certainly taken module whose possible semesters all lie in `q`.
        for (std::size_t k = 0; k < _p.module_combos.size(); ++k) {
            const int e = _p.module_combos[k].first;
            if (test(_taken.data(), e) && test(visible, e) && ! (_occ[k] & ~q))
                set(mu, e);
        }
    }

    void Evaluator::build_rows(const std::vector<Domain> & domains)
    {
        const int n = _p.horizon;
        for (int v = 0; v < _p.var_count(); ++v) {
            const Domain d = domains[v];
            Domain changed = d ^ _last[v];
            if (! changed)
                continue;
            const int e = _p.var_element[v];
            const Word bit = Word{1} << (e % 64);
            for (; changed; changed &= changed - 1) {
                const int b = std::countr_zero(changed);
                has(b)[e / 64] ^= bit;
            }
            _last[v] = d;
        }

        // Bits seen once and at least twice across value rows; a variable is decided when seen once.
        Word * once = _tmp.data();
        Word * twice = _tmp.data() + _w;
        for (int w = 0; w < 2 * _w; ++w)
            once[w] = 0;
        for (int b = 0; b <= n; ++b)
            for (int w = 0; w < _w; ++w) {
                twice[w] |= once[w] & has(b)[w];
                once[w] |= has(b)[w];
            }
        for (int i = 1; i <= n; ++i)
            for (int w = 0; w < _w; ++w) {
                row_may(i)[w] = has(i)[w];
                row_must(i)[w] = has(i)[w] & ~twice[w];
            }

        // Exam mode: a module occurs in semester i when some combination is complete with its last task at i.
        std::fill(_taken.begin(), _taken.end(), 0);
        for (std::size_t k = 0; k < _p.module_combos.size(); ++k) {
            const auto & [module, combos] = _p.module_combos[k];
            Domain & occ = _occ[k];
            occ = 0;
            for (const auto & vars : combos) {
                bool decided = true;
                bool takeable = true;
                int floor = 0;
                Domain any_bits = 0;
                for (int var : vars) {
                    const Domain d = domains[var];
                    if (! is_single(d))
                        decided = false;
                    if (! (d & ~none_bit))
                        takeable = false;
                    floor = std::max(floor, lowest_semester(d));
                    any_bits |= d;
                }
                if (! takeable)
                    continue;
                if (! (any_bits & none_bit))
                    set(_taken.data(), module);
                if (decided) {
                    set(row_must(floor), module);
                    set(row_may(floor), module);
                    occ |= Domain{1} << floor;
                    continue;
                }
                for (int i = std::max(floor, 1); i <= n; ++i)
                    if (any_bits & (Domain{1} << i)) {
                        set(row_may(i), module);
                        occ |= Domain{1} << i;
                    }
            }
        }
    }

    void Evaluator::eval_set(int node)
    {
        const SetNode & s = _p.sets[node];
        Word * mu = must(node);
        Word * ma = may(node);
        const int n = _p.horizon;
        const Word * universe = s.scope == Scope::exam ? _p.exam_universe.data() : _p.module_mask.data();
        const Word * modules = _p.module_mask.data();
        // Row elements visible in this scope.
        auto visible = [&](int w) { return universe[w]; };
        auto semesters = [](int from, int to) {
            Domain q = 0;
            for (int i = from; i <= to; ++i)
                q |= Domain{1} << i;
            return q;
        };

        switch (s.op) {
        case SetOp::named:
        case SetOp::literal:
        case SetOp::season:
        case SetOp::expand:
        case SetOp::family:
            std::copy(s.constant.begin(), s.constant.end(), mu);
            std::copy(s.constant.begin(), s.constant.end(), ma);
            return;
        case SetOp::plan_union:
            rows_union(semesters(1, n), modules, mu, ma);
            confined(semesters(1, n), mu, modules);
            return;
        case SetOp::exam_union:
            for (int w = 0; w < _w; ++w)
                _tmp[w] = universe[w] & ~modules[w];
            rows_union(semesters(1, n), _tmp.data(), mu, ma);
            confined(semesters(1, n), mu, _tmp.data());
            return;
        case SetOp::semester:
            rows_union(_semester_mask[node], modules, mu, ma);
            confined(_semester_mask[node], mu, modules);
            return;
        case SetOp::repeated: {
            // Elements seen in at least one / at least two rows.
            for (int w = 0; w < _w; ++w) {
                Word once_must = 0;
                Word once_may = 0;
                Word twice_must = 0;
                Word twice_may = 0;
                for (int i = 1; i <= n; ++i) {
                    const Word rm = row_must(i)[w] & modules[w];
                    const Word ry = row_may(i)[w] & modules[w];
                    twice_must |= once_must & rm;
                    twice_may |= once_may & ry;
                    once_must |= rm;
                    once_may |= ry;
                }
                // A decision variable takes a single semester.
                mu[w] = twice_must & ~_p.var_mask[w];
                ma[w] = twice_may & ~_p.var_mask[w];
            }
            return;
        }
        case SetOp::intersect:
            for (int w = 0; w < _w; ++w) {
                mu[w] = must(s.a)[w] & must(s.b)[w];
                ma[w] = may(s.a)[w] & may(s.b)[w];
            }
            return;
        case SetOp::unite:
            for (int w = 0; w < _w; ++w) {
                mu[w] = must(s.a)[w] | must(s.b)[w];
                ma[w] = may(s.a)[w] | may(s.b)[w];
            }
            return;
        case SetOp::difference:
            for (int w = 0; w < _w; ++w) {
                mu[w] = must(s.a)[w] & ~may(s.b)[w];
                ma[w] = may(s.a)[w] & ~must(s.b)[w];
            }
            return;
        case SetOp::complement:
            for (int w = 0; w < _w; ++w) {
                mu[w] = visible(w) & ~may(s.a)[w];
                ma[w] = visible(w) & ~must(s.a)[w];
            }
            return;
        case SetOp::before:
        case SetOp::after: {
            const bool before = s.op == SetOp::before;
            auto meets = [&](const Word * x, const Word * row) {
                for (int w = 0; w < _w; ++w)
                    if (x[w] & row[w] & visible(w))
                        return true;
                return false;
            };
            // Extreme witness semester of X: last for before, first for after; 0 when none.
            auto extreme = [&](const Word * x, bool use_must) {
                for (int k = 1; k <= n; ++k) {
                    int i = before ? n + 1 - k : k;
                    if (meets(x, use_must ? row_must(i) : row_may(i)))
                        return i;
                }
                return 0;
            };
            int k_must = extreme(must(s.a), true);
            const int k_may = extreme(may(s.a), false);
            // A certain witness that is certainly taken bounds the extreme semester by its domain.
            Word * certain = _tmp.data();
            bool some = false;
            for (int w = 0; w < _w; ++w)
                some |= (certain[w] = must(s.a)[w] & universe[w] & _p.var_mask[w] & ~has(0)[w]) != 0;
            // Exam mode: certainly taken modules, with their possible occurrence semesters.
            _witnesses.clear();
            for (std::size_t k = 0; k < _p.module_combos.size(); ++k) {
                const int e = _p.module_combos[k].first;
                if (test(_taken.data(), e) && test(must(s.a), e) && test(universe, e))
                    _witnesses.push_back(_occ[k]);
            }
            some |= ! _witnesses.empty();
            if (some) {
                // before: largest k with a witness whose lowest semester is >= k; after: smallest k
                // with a witness whose highest semester is <= k.
                Word * seen = _tmp.data() + _w;
                for (int w = 0; w < _w; ++w)
                    seen[w] = 0;
                int bound = 0;
                for (int k = 1; k <= n; ++k) {
                    const int i = before ? k : n + 1 - k;
                    bool left = false;
                    for (int w = 0; w < _w; ++w)
                        left |= (certain[w] & ~seen[w]) != 0;
                    const Domain earlier = before ? semesters(1, i - 1) : semesters(i + 1, n);
                    for (Domain occ : _witnesses)
                        left |= ! (occ & earlier);
                    if (! left)
                        break;
                    bound = i;
                    for (int w = 0; w < _w; ++w)
                        seen[w] |= has(i)[w];
                }
                if (before)
                    k_must = std::max(k_must, bound);
                else if (k_must == 0 || bound < k_must)
                    k_must = bound;
            }
            auto strictly = [&](int k) {
                if (! k)
                    return Domain{0};
                return before ? semesters(1, k - 1) : semesters(k + 1, n);
            };
            _extreme[node] = k_must == k_may ? k_must : -1;
            rows_union(strictly(k_may), universe, _tmp.data(), ma);
            rows_union(strictly(k_must), universe, mu, _tmp.data());
            if (k_must)
                confined(before ? semesters(1, k_must - 1) : semesters(k_must + 1, n), mu, universe);
            return;
        }
        case SetOp::between:
            // Compiled into after/before/intersect.
            return;
        }
    }

    auto Evaluator::eval_constraint(int node) -> Truth
    {
        const ConstraintNode & c = _p.constraints[node];
        auto subseteq = [&](int a, int b) {
            if (escapes(must(a), may(b), _w))
                return Truth::no;
            if (! escapes(may(a), must(b), _w))
                return Truth::yes;
            return Truth::unknown;
        };
        auto equal = [&](int a, int b) { return kleene_and(subseteq(a, b), subseteq(b, a)); };

        switch (c.op) {
        case ConstraintOp::empty:
            if (any(must(c.a), _w))
                return Truth::no;
            return any(may(c.a), _w) ? Truth::unknown : Truth::yes;
        case ConstraintOp::equal: return equal(c.a, c.b);
        case ConstraintOp::subseteq: return subseteq(c.a, c.b);
        case ConstraintOp::supseteq: return subseteq(c.b, c.a);
        case ConstraintOp::subset: return kleene_and(subseteq(c.a, c.b), kleene_not(equal(c.a, c.b)));
        case ConstraintOp::supset: return kleene_and(subseteq(c.b, c.a), kleene_not(equal(c.a, c.b)));
        case ConstraintOp::card: return compare(c.comparison, count(must(c.a), _w), count(may(c.a), _w));
        case ConstraintOp::sum: {
            if (escapes(must(c.a), c.weighted.data(), _w)) {
                Id missing;
                for (int w = 0; w < _w && missing.empty(); ++w)
                    if (Word x = must(c.a)[w] & ~c.weighted[w])
                        missing = _p.names[w * 64 + std::countr_zero(x)];
                throw EvalError("function has no value for '" + missing + "'");
            }
            long long lo = 0;
            long long hi = 0;
            for_each_bit(must(c.a), _w, [&](int e) {
                lo += c.weights[e];
                hi += c.weights[e];
            });
            for (int w = 0; w < _w; ++w)
                _tmp[w] = may(c.a)[w] & ~must(c.a)[w] & c.weighted[w];
            for_each_bit(_tmp.data(), _w, [&](int e) {
                lo += std::min(0LL, c.weights[e]);
                hi += std::max(0LL, c.weights[e]);
            });
            return compare(c.comparison, lo, hi);
        }
        case ConstraintOp::implies: {
            Truth p = eval_constraint(c.p);
            if (p == Truth::no)
                return Truth::yes;
            return kleene_or(kleene_not(p), eval_constraint(c.q));
        }
        case ConstraintOp::neg: return kleene_not(eval_constraint(c.p));
        case ConstraintOp::in_family: {
            const Word * mu = must(c.a);
            const Word * ma = may(c.a);
            const bool exact = ! escapes(ma, mu, _w);
            bool fits = false;
            for (const auto & f : c.family) {
                if (escapes(mu, f.data(), _w) || escapes(f.data(), ma, _w))
                    continue;
                if (exact)
                    return Truth::yes;
                fits = true;
            }
            return fits ? Truth::unknown : Truth::no;
        }
        }
        return Truth::unknown;
    }

    auto Evaluator::dependency(const CompiledDependency & dep) -> Truth
    {
        const auto & d = *_domains;
        constexpr int infinity = std::numeric_limits<int>::max();

        auto taken = [&](const std::vector<int> & vars) {
            Truth t = Truth::yes;
            for (int v : vars) {
                if (d[v] == none_bit)
                    return Truth::no;
                if (d[v] & none_bit)
                    t = Truth::unknown;
            }
            return t;
        };

        Truth premise = taken(dep.primary);
        if (premise == Truth::no)
            return Truth::yes;

        // Bounds of min over taken semesters of W.
        int w_lo = infinity;
        int w_hi = infinity;
        for (int v : dep.primary) {
            w_lo = std::min(w_lo, lowest_semester(d[v]));
            w_hi = std::min(w_hi, highest_semester(d[v]));
        }

        Truth consequent = Truth::no;
        for (const auto & option : dep.options) {
            // Bounds of max over taken semesters of V; 0 for the empty V.
            int v_lo = 0;
            int v_hi = 0;
            for (int v : option) {
                v_lo = std::max(v_lo, lowest_semester(d[v]));
                v_hi = std::max(v_hi, highest_semester(d[v]));
            }
            Truth order = v_hi <= w_lo ? Truth::yes : v_lo > w_hi ? Truth::no : Truth::unknown;
            consequent = kleene_or(consequent, kleene_and(taken(option), order));
            if (consequent == Truth::yes)
                break;
        }
        return kleene_or(kleene_not(premise), consequent);
    }

    auto Evaluator::propagate(std::vector<Domain> & domains) -> bool
    {
        const int n = _p.horizon;
        const Domain all = ((Domain{1} << n) - 1) << 1;
        for (const auto & [root, core, members] : _sums) {
            const ConstraintNode & c = _p.constraints[root];
            // Semesters whose modules are in the core set.
            Domain q = all;
            const SetNode & s = _p.sets[core];
            if (s.op == SetOp::semester) {
                q = _semester_mask[core];
            }
            else if (s.op == SetOp::before || s.op == SetOp::after) {
                const int k = _extreme[core];
                if (k <= 0)
                    continue;
                q = s.op == SetOp::before ? all & ((Domain{1} << k) - 1) : all & ~((Domain{2} << k) - 1);
            }
            const Word * mu = must(c.a);
            const Word * ma = may(c.a);
            long long lo = 0;
            long long hi = 0;
            for (int w = 0; w < _w; ++w) {
                for (Word x = mu[w]; x; x &= x - 1) {
                    const long long k = c.weights[w * 64 + std::countr_zero(x)];
                    lo += k;
                    hi += k;
                }
                for (Word x = ma[w] & ~mu[w] & c.weighted[w]; x; x &= x - 1) {
                    const long long k = c.weights[w * 64 + std::countr_zero(x)];
                    lo += std::min(0LL, k);
                    hi += std::max(0LL, k);
                }
            }
            for (int w = 0; w < _w; ++w)
                for (Word x = ma[w] & ~mu[w] & c.weighted[w] & members[w]; x; x &= x - 1) {
                    const int e = w * 64 + std::countr_zero(x);
                    const long long k = c.weights[e];
                    const long long base_lo = lo - std::min(0LL, k);
                    const long long base_hi = hi - std::max(0LL, k);
                    const bool cannot_take = compare(c.comparison, base_lo + k, base_hi + k) == Truth::no;
                    const bool must_take = compare(c.comparison, base_lo, base_hi) == Truth::no;
                    if (_p.mode == Mode::study) {
                        const int v = _p.var_of[e];
                        if (v < 0)
                            continue;
                        Domain & d = domains[v];
                        if (cannot_take)
                            d &= ~q;
                        if (must_take)
                            d &= q;
                        if (! d)
                            return false;
                        continue;
                    }
                    // Exam mode: a module is taken iff some combination is complete, and the completion
                    // constraints leave every task of an untaken module out.
                    if (cannot_take && must_take)
                        return false;
                    const int m = _combo_of[e];
                    if (m < 0)
                        continue;
                    if (cannot_take)
                        for (int v : _task_vars[m])
                            if (! (domains[v] &= none_bit))
                                return false;
                    if (must_take && _p.module_combos[m].second.size() == 1)
                        for (int v : _p.module_combos[m].second.front())
                            if (! (domains[v] &= ~none_bit))
                                return false;
                }
        }
        return true;
    }

    auto Evaluator::check(const std::vector<Domain> & domains, std::span<const CheckedAssumption> extra) -> Truth
    {
        _failed = -1;
        for (Domain d : domains)
            if (! d)
                return Truth::no;
        _domains = &domains;
        build_rows(domains);

        Truth result = Truth::yes;
        auto assumption = [&](const CheckedAssumption & a) {
            const bool must_in = test(row_must(a.semester), a.element);
            const bool may_in = test(row_may(a.semester), a.element);
            Truth in = must_in ? Truth::yes : may_in ? Truth::unknown : Truth::no;
            return a.polarity == Polarity::assigned ? in : kleene_not(in);
        };
        for (const auto & a : _p.assumptions)
            if ((result = kleene_and(result, assumption(a))) == Truth::no)
                return result;
        for (const auto & a : extra)
            if ((result = kleene_and(result, assumption(a))) == Truth::no)
                return result;

        for (const auto & dep : _p.dependencies)
            if ((result = kleene_and(result, dependency(dep))) == Truth::no)
                return result;

        for (int node : _dynamic)
            eval_set(node);
        for (std::size_t r = 0; r < _p.roots.size(); ++r) {
            result = kleene_and(result, eval_constraint(_p.roots[r]));
            if (result == Truth::no) {
                _failed = static_cast<int>(r);
                return result;
            }
        }
        return result;
    }
}
