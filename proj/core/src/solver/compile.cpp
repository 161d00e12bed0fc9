#include "problem.hpp"

#include <regula/semantics.hpp>

#include <algorithm>
#include <numeric>
#include <map>
#include <tuple>

using std::string;
using std::vector;

namespace regula::solver
{
    void check_request(const SolveRequest & request)
    {
        if (request.horizon < 1 || request.horizon > max_horizon)
            throw RequestError("horizon must be between 1 and " + std::to_string(max_horizon));
        if (request.mode == Mode::exam && ! request.exam)
            throw RequestError("exam mode requires examination facts");
        for (const auto & a : request.assumptions) {
            if (! request.regulation.modules.contains(a.module))
                throw RequestError("assumption on undeclared module '" + a.module + "'");
            if (a.semester < 1 || a.semester > request.horizon)
                throw RequestError("assumption semester " + std::to_string(a.semester) + " outside 1.."
                    + std::to_string(request.horizon));
        }
    }

    auto decision_order(const SolveRequest & request) -> vector<Id>
    {
        const auto & reg = request.regulation;
        vector<Id> modules(reg.modules.begin(), reg.modules.end());
        auto credits = [&](const Id & m) {
            auto it = reg.credits.find(m);
            return it == reg.credits.end() ? 0LL : it->second;
        };
        std::stable_sort(modules.begin(), modules.end(), [&](const Id & a, const Id & b) { return credits(a) > credits(b); });
        if (request.mode == Mode::study)
            return modules;

        const auto & exam = *request.exam;
        vector<Id> out;
        IdSet placed;
        for (const auto & m : modules)
            for (const auto & t : exam.tasks_of(m))
                if (exam.kind_of(t) && placed.insert(t).second)
                    out.push_back(t);
        IdSet all = exam.primary_tasks;
        all.insert(exam.secondary_tasks.begin(), exam.secondary_tasks.end());
        for (const auto & t : all)
            if (placed.insert(t).second)
                out.push_back(t);
        return out;
    }
}

namespace regula::solver::detail
{
    auto compare(const Comparison & c, long long lo, long long hi) noexcept -> Truth
    {
        auto verdict = [](bool always, bool never) { return always ? Truth::yes : never ? Truth::no : Truth::unknown; };
        switch (c.op) {
        case CompareOp::leq: return verdict(hi <= c.bound, lo > c.bound);
        case CompareOp::geq: return verdict(lo >= c.bound, hi < c.bound);
        case CompareOp::lt: return verdict(hi < c.bound, lo >= c.bound);
        case CompareOp::gt: return verdict(lo > c.bound, hi <= c.bound);
        case CompareOp::eq: return verdict(lo == c.bound && hi == c.bound, c.bound < lo || c.bound > hi);
        case CompareOp::bw: return verdict(lo >= c.bound && hi <= c.upper, hi < c.bound || lo > c.upper);
        }
        return Truth::unknown;
    }

    namespace
    {
        auto set_node(SetOp op, Scope scope, int a = -1, int b = -1) -> SetNode
        {
            SetNode n;
            n.op = op;
            n.scope = scope;
            n.a = a;
            n.b = b;
            return n;
        }

        class Compiler
        {
        public:
            Compiler(const SolveRequest & request, Problem & p, const IdSet & first) :
                _req(request),
                _reg(request.regulation),
                _p(p),
                _first(first)
            {
            }

            void run()
            {
                index_elements();
                make_variables();
                if (_p.mode == Mode::exam)
                    make_combos();

                for (const auto & c : _reg.global_constraints)
                    add_root(c, Scope::study, "global " + to_string(c));
                for (const auto & c : _reg.temporal_constraints)
                    add_root(c, Scope::study, "temporal " + to_string(c));

                if (_p.mode == Mode::exam) {
                    const auto & exam = *_req.exam;
                    for (const auto & [label, c] : semantics::module_completion_constraints(_reg, exam))
                        add_root(c, Scope::exam, "exam_global " + label);
                    for (const auto & c : exam.global_constraints)
                        add_root(c, Scope::exam, "exam_global " + to_string(c));
                    for (const auto & c : exam.temporal_constraints)
                        add_root(c, Scope::exam, "exam_temporal " + to_string(c));
                    make_dependencies();
                }

                for (const auto & a : _req.assumptions) {
                    _p.assumptions.push_back(CheckedAssumption{_p.index.at(a.module), a.semester, a.polarity});
                    if (_p.mode == Mode::study) {
                        auto & d = _p.root_domain[_p.var_of[_p.index.at(a.module)]];
                        Domain bit = Domain{1} << a.semester;
                        d = a.polarity == Polarity::assigned ? (d & bit) : (d & ~bit);
                    }
                }
            }

        private:
            void add_id(const Id & id)
            {
                if (_p.index.emplace(id, static_cast<int>(_p.names.size())).second)
                    _p.names.push_back(id);
            }

            void collect(const SetExpr & e)
            {
                for (const auto & id : e.elements)
                    add_id(id);
                for (const auto & s : e.members)
                    for (const auto & id : s)
                        add_id(id);
                if (e.op == SetOp::named)
                    if (const auto * s = _reg.find_set(e.name))
                        for (const auto & id : *s)
                            add_id(id);
                for (const auto & a : e.args)
                    collect(a);
            }

            void collect(const ConstraintExpr & c)
            {
                for (const auto & s : c.sets)
                    collect(s);
                for (const auto & a : c.args)
                    collect(a);
            }

            void index_elements()
            {
                for (const auto & m : _reg.modules)
                    add_id(m);
                const int module_count = static_cast<int>(_p.names.size());
                if (_req.exam) {
                    for (const auto & t : _req.exam->primary_tasks)
                        add_id(t);
                    for (const auto & t : _req.exam->secondary_tasks)
                        add_id(t);
                }
                const int declared = static_cast<int>(_p.names.size());

                for (const auto & c : _reg.global_constraints)
                    collect(c);
                for (const auto & c : _reg.temporal_constraints)
                    collect(c);
                if (_req.exam) {
                    for (const auto & c : _req.exam->global_constraints)
                        collect(c);
                    for (const auto & c : _req.exam->temporal_constraints)
                        collect(c);
                    for (const auto * options : {&_req.exam->primary_options, &_req.exam->secondary_options})
                        for (const auto & [m, fam] : *options)
                            for (const auto & s : fam)
                                for (const auto & id : s)
                                    add_id(id);
                }

                _p.words = std::max<int>(1, static_cast<int>((_p.names.size() + 63) / 64));
                _p.module_mask.assign(_p.words, 0);
                _p.exam_universe.assign(_p.words, 0);
                for (int i = 0; i < module_count; ++i)
                    set_bit(_p.module_mask, i);
                for (int i = 0; i < declared; ++i)
                    set_bit(_p.exam_universe, i);
            }

            static void set_bit(Words & w, int i) { w[i / 64] |= Word{1} << (i % 64); }

            auto bits_of(const IdSet & ids) const -> Words
            {
                Words w(_p.words, 0);
                for (const auto & id : ids)
                    set_bit(w, _p.index.at(id));
                return w;
            }

            void make_variables()
            {
                _p.var_of.assign(_p.names.size(), -1);
                _p.var_mask.assign(_p.words, 0);
                const Domain full = (Domain{1} << (_p.horizon + 1)) - 1;
                auto order = decision_order(_req);
                if (! _first.empty()) {
                    IdSet tasks;
                    if (_p.mode == Mode::exam)
                        for (const auto & m : _first)
                            tasks.merge(_req.exam->tasks_of(m));
                    auto leading = [&](const Id & id) { return _first.contains(id) || tasks.contains(id); };
                    std::stable_partition(order.begin(), order.end(), leading);
                }
                for (const auto & id : order) {
                    int e = _p.index.at(id);
                    _p.var_of[e] = static_cast<int>(_p.var_element.size());
                    set_bit(_p.var_mask, e);
                    _p.var_element.push_back(e);
                    _p.root_domain.push_back(full);
                }
                _p.vars_by_name.resize(_p.var_element.size());
                std::iota(_p.vars_by_name.begin(), _p.vars_by_name.end(), 0);
                std::sort(_p.vars_by_name.begin(), _p.vars_by_name.end(),
                    [&](int a, int b) { return _p.names[_p.var_element[a]] < _p.names[_p.var_element[b]]; });
            }

            void make_combos()
            {
                const auto & exam = *_req.exam;
                for (const auto & m : _reg.modules) {
                    auto ep = exam.primary_options.find(m);
                    auto es = exam.secondary_options.find(m);
                    if (ep == exam.primary_options.end() || es == exam.secondary_options.end())
                        continue;
                    vector<vector<int>> combos;
                    for (const auto & v : es->second)
                        for (const auto & w : ep->second) {
                            IdSet vw = v;
                            vw.insert(w.begin(), w.end());
                            if (vw.empty())
                                continue;
                            vector<int> vars;
                            bool decidable = true;
                            for (const auto & t : vw) {
                                int var = _p.var_of[_p.index.at(t)];
                                if (var < 0)
                                    decidable = false;
                                vars.push_back(var);
                            }
                            if (decidable)
                                combos.push_back(std::move(vars));
                        }
                    _p.module_combos.emplace_back(_p.index.at(m), std::move(combos));
                }
            }

            void make_dependencies()
            {
                for (const auto & dep : _req.exam->dependencies) {
                    CompiledDependency out;
                    bool reachable = true;
                    for (const auto & t : dep.primary) {
                        auto it = _p.index.find(t);
                        int var = it == _p.index.end() ? -1 : _p.var_of[it->second];
                        if (var < 0)
                            reachable = false;
                        out.primary.push_back(var);
                    }
                    // W can never be fully taken: the dependency holds vacuously.
                    if (! reachable)
                        continue;
                    for (const auto & v : dep.secondary_options) {
                        vector<int> vars;
                        bool ok = true;
                        for (const auto & t : v) {
                            auto it = _p.index.find(t);
                            int var = it == _p.index.end() ? -1 : _p.var_of[it->second];
                            if (var < 0)
                                ok = false;
                            vars.push_back(var);
                        }
                        if (ok)
                            out.options.push_back(std::move(vars));
                    }
                    _p.dependencies.push_back(std::move(out));
                }
            }

            // Structurally equal nodes are shared.
            auto push_set(SetNode node) -> int
            {
                auto key = std::make_tuple(node.op, node.scope, node.a, node.b, node.index, node.constant);
                if (auto it = _shared.find(key); it != _shared.end())
                    return it->second;
                _p.sets.push_back(std::move(node));
                const int id = static_cast<int>(_p.sets.size()) - 1;
                _shared.emplace(std::move(key), id);
                return id;
            }

            auto constant(Words w, Scope scope) -> int
            {
                SetNode n = set_node(SetOp::literal, scope);
                n.constant = std::move(w);
                return push_set(std::move(n));
            }

            auto family_bits(const SetExpr & e) -> vector<Words>
            {
                if (e.op != SetOp::family)
                    throw EvalError("set of sets expected: " + to_string(e));
                vector<Words> out;
                for (const auto & s : e.members)
                    out.push_back(bits_of(s));
                return out;
            }

            auto compile_set(const SetExpr & e, Scope scope) -> int
            {
                switch (e.op) {
                case SetOp::named: {
                    const auto * s = _reg.find_set(e.name);
                    if (! s)
                        throw EvalError("unresolved set '" + e.name + "'");
                    return constant(bits_of(*s), scope);
                }
                case SetOp::literal: return constant(bits_of(e.elements), scope);
                case SetOp::season: return constant(bits_of(_reg.modules_of_season(e.season)), scope);
                case SetOp::family: throw EvalError("set of sets used where a set is expected: " + to_string(e));
                case SetOp::expand: {
                    if (e.args[0].op != SetOp::family)
                        throw EvalError("expand applied to a flat set: " + to_string(e));
                    IdSet all;
                    for (const auto & s : e.args[0].members)
                        all.insert(s.begin(), s.end());
                    return constant(bits_of(all), scope);
                }
                case SetOp::exam_union:
                    if (scope == Scope::study)
                        return constant(Words(_p.words, 0), scope);
                    [[fallthrough]];
                case SetOp::plan_union:
                case SetOp::repeated: return push_set(set_node(e.op, scope));
                case SetOp::semester: {
                    SetNode n = set_node(e.op, scope);
                    n.index = e.index;
                    return push_set(std::move(n));
                }
                case SetOp::between: {
                    int after = push_set(set_node(SetOp::after, scope, compile_set(e.args[0], scope)));
                    int before = push_set(set_node(SetOp::before, scope, compile_set(e.args[1], scope)));
                    return push_set(set_node(SetOp::intersect, scope, after, before));
                }
                case SetOp::complement:
                case SetOp::before:
                case SetOp::after: return push_set(set_node(e.op, scope, compile_set(e.args[0], scope)));
                case SetOp::intersect:
                case SetOp::unite:
                case SetOp::difference: {
                    int a = compile_set(e.args[0], scope);
                    int b = compile_set(e.args[1], scope);
                    return push_set(set_node(e.op, scope, a, b));
                }
                }
                throw EvalError("unknown set operator");
            }

            auto push_constraint(ConstraintNode node) -> int
            {
                _p.constraints.push_back(std::move(node));
                return static_cast<int>(_p.constraints.size()) - 1;
            }

            auto compile_constraint(const ConstraintExpr & c, Scope scope) -> int
            {
                ConstraintNode n;
                n.op = c.op;
                n.comparison = c.comparison;
                switch (c.op) {
                case ConstraintOp::implies:
                    n.p = compile_constraint(c.args[0], scope);
                    n.q = compile_constraint(c.args[1], scope);
                    break;
                case ConstraintOp::neg: n.p = compile_constraint(c.args[0], scope); break;
                case ConstraintOp::in_family:
                    n.a = compile_set(c.sets[0], scope);
                    n.family = family_bits(c.sets[1]);
                    break;
                case ConstraintOp::sum: {
                    n.a = compile_set(c.sets[0], scope);
                    auto values = _reg.find_function(c.function);
                    if (! values)
                        throw EvalError("unresolved function '" + c.function + "'");
                    n.weights.assign(_p.names.size(), 0);
                    n.weighted.assign(_p.words, 0);
                    for (const auto & [id, v] : *values)
                        if (auto it = _p.index.find(id); it != _p.index.end()) {
                            n.weights[it->second] = v;
                            set_bit(n.weighted, it->second);
                        }
                    break;
                }
                default:
                    n.a = compile_set(c.sets[0], scope);
                    if (c.sets.size() > 1)
                        n.b = compile_set(c.sets[1], scope);
                }
                return push_constraint(std::move(n));
            }

            void add_root(const ConstraintExpr & c, Scope scope, string label)
            {
                _p.roots.push_back(compile_constraint(c, scope));
                _p.root_labels.push_back(std::move(label));
            }

            const SolveRequest & _req;
            const Regulation & _reg;
            Problem & _p;
            const IdSet & _first;
            std::map<std::tuple<SetOp, Scope, int, int, SemesterIndex, Words>, int> _shared;
        };

        // Removes every value whose singleton assignment (all other variables at their
        // current domains) already falsifies a constraint. Iterated to a fixpoint.
        void filter_root_domains(Problem & p)
        {
            Evaluator eval(p);
            auto domains = p.root_domain;
            bool changed = true;
            while (changed) {
                changed = false;
                for (int v = 0; v < p.var_count(); ++v) {
                    Domain original = domains[v];
                    Domain kept = 0;
                    for (int bit = 0; bit <= p.horizon; ++bit) {
                        Domain value = Domain{1} << bit;
                        if (! (original & value))
                            continue;
                        domains[v] = value;
                        if (eval.check(domains) != Truth::no)
                            kept |= value;
                    }
                    domains[v] = kept;
                    if (kept != original)
                        changed = true;
                    if (! kept) {
                        p.root_domain = domains;
                        return;
                    }
                }
            }
            p.root_domain = domains;
        }
    }

    auto compile(const SolveRequest & request, const IdSet & first) -> std::shared_ptr<Problem>
    {
        check_request(request);
        auto p = std::make_shared<Problem>();
        p->mode = request.mode;
        p->horizon = request.horizon;
        p->modules = request.regulation.modules;
        if (request.mode == Mode::exam)
            p->exam = request.exam;
        Compiler(request, *p, first).run();
        filter_root_domains(*p);
        return p;
    }
}
