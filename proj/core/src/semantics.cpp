#include <regula/semantics.hpp>

#include <algorithm>
#include <limits>
#include <sstream>

using std::string;
using std::vector;

namespace regula::semantics
{
    auto EvalContext::universe() const -> IdSet
    {
        IdSet u = regulation.modules;
        if (exam) {
            u.insert(exam->primary_tasks.begin(), exam->primary_tasks.end());
            u.insert(exam->secondary_tasks.begin(), exam->secondary_tasks.end());
        }
        return u;
    }

    auto EvalContext::occurs_in(const Id & element, int semester) const -> bool
    {
        if (semester < 1 || semester > horizon())
            return false;
        if (plan.semesters[semester - 1].contains(element))
            return true;
        return exam_plan && semester <= exam_plan->horizon() && exam_plan->semesters[semester - 1].contains(element);
    }

    namespace
    {
        auto set_union(const IdSet & a, const IdSet & b) -> IdSet
        {
            IdSet out = a;
            out.insert(b.begin(), b.end());
            return out;
        }

        auto set_intersect(const IdSet & a, const IdSet & b) -> IdSet
        {
            IdSet out;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
            return out;
        }

        auto set_difference(const IdSet & a, const IdSet & b) -> IdSet
        {
            IdSet out;
            std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
            return out;
        }

        auto subset_of(const IdSet & a, const IdSet & b) -> bool
        {
            return std::includes(b.begin(), b.end(), a.begin(), a.end());
        }

        // { x ∈ U | x occurs in some semester i, and some element of X occurs in a semester k with i ≺ k }
        template <typename Precedes>
        auto temporal(const IdSet & x, const EvalContext & ctx, Precedes precedes) -> IdSet
        {
            IdSet out;
            const int n = ctx.horizon();
            for (const auto & e : ctx.universe())
                for (int i = 1; i <= n && ! out.contains(e); ++i) {
                    if (! ctx.occurs_in(e, i))
                        continue;
                    for (int k = 1; k <= n && ! out.contains(e); ++k)
                        if (precedes(i, k))
                            for (const auto & witness : x)
                                if (ctx.occurs_in(witness, k)) {
                                    out.insert(e);
                                    break;
                                }
                }
            return out;
        }

        auto exam_union(const EvalContext & ctx) -> IdSet
        {
            return ctx.exam_plan ? ctx.exam_plan->all_tasks() : IdSet{};
        }

        auto sum_of(const ConstraintExpr & c, const IdSet & a, const EvalContext & ctx) -> long long
        {
            auto values = ctx.regulation.find_function(c.function);
            if (! values)
                throw EvalError("unresolved function '" + c.function + "'");
            long long total = 0;
            for (const auto & e : a) {
                auto it = values->find(e);
                if (it == values->end())
                    throw EvalError("function '" + c.function + "' has no value for '" + e + "'");
                total += it->second;
            }
            return total;
        }
    }

    auto eval_set(const SetExpr & e, const EvalContext & ctx) -> Value
    {
        switch (e.op) {
        case SetOp::named: {
            const auto * s = ctx.regulation.find_set(e.name);
            if (! s)
                throw EvalError("unresolved set '" + e.name + "'");
            return *s;
        }
        case SetOp::plan_union: return ctx.plan.all_modules();
        case SetOp::semester: {
            IdSet out;
            for (int i = 1; i <= ctx.horizon(); ++i)
                if (e.index.selects(i))
                    out.insert(ctx.plan.semesters[i - 1].begin(), ctx.plan.semesters[i - 1].end());
            return out;
        }
        case SetOp::season: return ctx.regulation.modules_of_season(e.season);
        case SetOp::exam_union: return exam_union(ctx);
        case SetOp::repeated: {
            IdSet seen, out;
            for (const auto & s : ctx.plan.semesters)
                for (const auto & m : s)
                    if (! seen.insert(m).second)
                        out.insert(m);
            return out;
        }
        case SetOp::intersect: return set_intersect(eval_flat(e.args[0], ctx), eval_flat(e.args[1], ctx));
        case SetOp::unite: return set_union(eval_flat(e.args[0], ctx), eval_flat(e.args[1], ctx));
        case SetOp::difference: return set_difference(eval_flat(e.args[0], ctx), eval_flat(e.args[1], ctx));
        case SetOp::complement: return set_difference(ctx.universe(), eval_flat(e.args[0], ctx));
        case SetOp::before: return temporal(eval_flat(e.args[0], ctx), ctx, [](int i, int k) { return i < k; });
        case SetOp::after: return temporal(eval_flat(e.args[0], ctx), ctx, [](int i, int k) { return i > k; });
        case SetOp::between: {
            auto after = temporal(eval_flat(e.args[0], ctx), ctx, [](int i, int k) { return i > k; });
            auto before = temporal(eval_flat(e.args[1], ctx), ctx, [](int i, int k) { return i < k; });
            return set_intersect(after, before);
        }
        case SetOp::expand: {
            auto inner = eval_set(e.args[0], ctx);
            const auto * fam = std::get_if<Family>(&inner);
            if (! fam)
                throw EvalError("expand applied to a flat set: " + to_string(e));
            IdSet out;
            for (const auto & s : *fam)
                out.insert(s.begin(), s.end());
            return out;
        }
        case SetOp::literal: return e.elements;
        case SetOp::family: return e.members;
        }
        throw EvalError("unknown set operator");
    }

    auto eval_flat(const SetExpr & e, const EvalContext & ctx) -> IdSet
    {
        auto v = eval_set(e, ctx);
        if (auto * s = std::get_if<IdSet>(&v))
            return std::move(*s);
        throw EvalError("set of sets used where a set is expected: " + to_string(e));
    }

    auto holds(const ConstraintExpr & c, const EvalContext & ctx) -> bool
    {
        switch (c.op) {
        case ConstraintOp::empty: return eval_flat(c.sets[0], ctx).empty();
        case ConstraintOp::equal: return eval_flat(c.sets[0], ctx) == eval_flat(c.sets[1], ctx);
        case ConstraintOp::subseteq: return subset_of(eval_flat(c.sets[0], ctx), eval_flat(c.sets[1], ctx));
        case ConstraintOp::supseteq: return subset_of(eval_flat(c.sets[1], ctx), eval_flat(c.sets[0], ctx));
        case ConstraintOp::subset: {
            auto a = eval_flat(c.sets[0], ctx), b = eval_flat(c.sets[1], ctx);
            return subset_of(a, b) && a != b;
        }
        case ConstraintOp::supset: {
            auto a = eval_flat(c.sets[0], ctx), b = eval_flat(c.sets[1], ctx);
            return subset_of(b, a) && a != b;
        }
        case ConstraintOp::card:
            return c.comparison.accepts(static_cast<long long>(eval_flat(c.sets[0], ctx).size()));
        case ConstraintOp::sum: return c.comparison.accepts(sum_of(c, eval_flat(c.sets[0], ctx), ctx));
        case ConstraintOp::implies: return ! holds(c.args[0], ctx) || holds(c.args[1], ctx);
        case ConstraintOp::neg: return ! holds(c.args[0], ctx);
        case ConstraintOp::in_family: {
            auto a = eval_flat(c.sets[0], ctx);
            auto f = eval_set(c.sets[1], ctx);
            const auto * fam = std::get_if<Family>(&f);
            if (! fam)
                throw EvalError("in_fam expects a set of sets: " + to_string(c.sets[1]));
            return fam->contains(a);
        }
        }
        throw EvalError("unknown constraint");
    }

    auto explain_failure(const ConstraintExpr & c, const EvalContext & ctx) -> string
    {
        if (holds(c, ctx))
            return {};

        auto first_of = [](const IdSet & s) { return *s.begin(); };
        switch (c.op) {
        case ConstraintOp::empty: {
            auto a = eval_flat(c.sets[0], ctx);
            return to_string(c.sets[0]) + " is not empty: contains " + first_of(a);
        }
        case ConstraintOp::equal:
        case ConstraintOp::subseteq:
        case ConstraintOp::supseteq:
        case ConstraintOp::subset:
        case ConstraintOp::supset: {
            auto a = eval_flat(c.sets[0], ctx), b = eval_flat(c.sets[1], ctx);
            auto a_b = set_difference(a, b), b_a = set_difference(b, a);
            bool forward = c.op == ConstraintOp::equal || c.op == ConstraintOp::subseteq || c.op == ConstraintOp::subset;
            bool backward = c.op == ConstraintOp::equal || c.op == ConstraintOp::supseteq || c.op == ConstraintOp::supset;
            if (forward && ! a_b.empty())
                return first_of(a_b) + " is in " + to_string(c.sets[0]) + " but not in " + to_string(c.sets[1]);
            if (backward && ! b_a.empty())
                return first_of(b_a) + " is in " + to_string(c.sets[1]) + " but not in " + to_string(c.sets[0]);
            return to_string(c.sets[0]) + " and " + to_string(c.sets[1]) + " are equal, " + to_string(a);
        }
        case ConstraintOp::card: {
            auto a = eval_flat(c.sets[0], ctx);
            return "|" + to_string(c.sets[0]) + "| = " + std::to_string(a.size()) + ", required " + to_string(c.comparison);
        }
        case ConstraintOp::sum: {
            auto a = eval_flat(c.sets[0], ctx);
            return "sum of " + c.function + " over " + to_string(c.sets[0]) + " = " + std::to_string(sum_of(c, a, ctx))
                + " " + to_string(a) + ", required " + to_string(c.comparison);
        }
        case ConstraintOp::implies:
            return "premise " + to_string(c.args[0]) + " holds but " + explain_failure(c.args[1], ctx);
        case ConstraintOp::neg: return to_string(c.args[0]) + " holds";
        case ConstraintOp::in_family:
            return to_string(c.sets[0]) + " = " + to_string(eval_flat(c.sets[0], ctx)) + " is not a member of "
                + to_string(c.sets[1]);
        }
        return "constraint fails";
    }

    namespace
    {
        void require_horizon(int n)
        {
            if (n < 1)
                throw EvalError("plan horizon must be at least 1");
        }

        void check_constraints(const vector<ConstraintExpr> & cs, const char * section, const EvalContext & ctx,
            ValidationReport & report, const string & prefix = {})
        {
            for (std::size_t i = 0; i < cs.size(); ++i) {
                auto reason = explain_failure(cs[i], ctx);
                if (! reason.empty())
                    report.violations.push_back(
                        Violation{prefix + section + "[" + std::to_string(i) + "] " + to_string(cs[i]), std::move(reason)});
            }
        }
    }

    auto validate_study_plan(const Regulation & reg, const StudyPlan & plan) -> ValidationReport
    {
        require_horizon(plan.horizon());
        for (const auto & m : plan.all_modules())
            if (! reg.modules.contains(m))
                throw EvalError("plan references undeclared module '" + m + "'");

        EvalContext ctx{reg, plan};
        ValidationReport report;
        check_constraints(reg.global_constraints, "global", ctx, report);
        check_constraints(reg.temporal_constraints, "temporal", ctx, report);
        return report;
    }

    auto induce(const ExamPlan & eplan, const ExamSpec & exam, const IdSet & modules) -> StudyPlan
    {
        const int n = eplan.horizon();
        // cumulative[i] = E_1 ∪ ... ∪ E_i, cumulative[0] = ∅
        vector<IdSet> cumulative(n + 1);
        for (int i = 1; i <= n; ++i)
            cumulative[i] = set_union(cumulative[i - 1], eplan.semesters[i - 1]);

        StudyPlan out;
        out.semesters.resize(n);
        for (const auto & m : modules) {
            auto ep = exam.primary_options.find(m);
            auto es = exam.secondary_options.find(m);
            if (ep == exam.primary_options.end() || es == exam.secondary_options.end())
                continue;
            for (const auto & v : es->second)
                for (const auto & w : ep->second) {
                    auto vw = set_union(v, w);
                    for (int i = 1; i <= n; ++i)
                        if (subset_of(vw, cumulative[i]) && ! subset_of(vw, cumulative[i - 1]))
                            out.semesters[i - 1].insert(m);
                }
        }
        return out;
    }

    auto module_completion_constraints(const Regulation & reg, const ExamSpec & exam) -> vector<LabelledConstraint>
    {
        vector<LabelledConstraint> out;
        for (const auto & m : reg.modules) {
            auto ep_it = exam.primary_options.find(m);
            auto es_it = exam.secondary_options.find(m);
            if (ep_it == exam.primary_options.end() && es_it == exam.secondary_options.end())
                continue;
            Family ep = ep_it == exam.primary_options.end() ? Family{} : ep_it->second;
            Family es = es_it == exam.secondary_options.end() ? Family{} : es_it->second;
            Family both = ep;
            both.insert(es.begin(), es.end());

            auto touched = ConstraintExpr::neg(
                ConstraintExpr::empty(SetExpr::intersect(SetExpr::exam_union(), SetExpr::expand(SetExpr::family(both)))));
            auto chosen = [](const Family & f) {
                return ConstraintExpr::in_family(
                    SetExpr::intersect(SetExpr::exam_union(), SetExpr::expand(SetExpr::family(f))), SetExpr::family(f));
            };
            out.push_back({"completion(" + m + ",primary)", ConstraintExpr::implies(touched, chosen(ep))});
            out.push_back({"completion(" + m + ",secondary)", ConstraintExpr::implies(touched, chosen(es))});
        }
        return out;
    }

    namespace
    {
        constexpr int no_semester = std::numeric_limits<int>::max();

        auto first_semester(const IdSet & tasks, const ExamPlan & eplan) -> int
        {
            for (int i = 1; i <= eplan.horizon(); ++i)
                if (! set_intersect(tasks, eplan.semesters[i - 1]).empty())
                    return i;
            return no_semester;
        }

        auto last_semester(const IdSet & tasks, const ExamPlan & eplan) -> int
        {
            for (int i = eplan.horizon(); i >= 1; --i)
                if (! set_intersect(tasks, eplan.semesters[i - 1]).empty())
                    return i;
            return 0;
        }
    }

    auto dependency_holds(const Dependency & dep, const ExamPlan & eplan) -> bool
    {
        auto taken = eplan.all_tasks();
        if (! subset_of(dep.primary, taken))
            return true;
        int first_primary = first_semester(dep.primary, eplan);
        return std::any_of(dep.secondary_options.begin(), dep.secondary_options.end(), [&](const IdSet & v) {
            return subset_of(v, taken) && last_semester(v, eplan) <= first_primary;
        });
    }

    auto validate_exam_plan(const Regulation & reg, const ExamSpec & exam, const ExamPlan & eplan) -> ValidationReport
    {
        require_horizon(eplan.horizon());
        for (const auto & t : eplan.all_tasks())
            if (! exam.kind_of(t))
                throw EvalError("exam plan references undeclared task '" + t + "'");

        auto induced = induce(eplan, exam, reg.modules);
        ValidationReport report;
        for (auto & v : validate_study_plan(reg, induced).violations) {
            v.constraint = "study " + v.constraint;
            report.violations.push_back(std::move(v));
        }

        EvalContext ctx{reg, induced, &exam, &eplan};
        for (const auto & [label, c] : module_completion_constraints(reg, exam)) {
            auto reason = explain_failure(c, ctx);
            if (! reason.empty())
                report.violations.push_back(Violation{"exam_global " + label, std::move(reason)});
        }

        bool disjoint_reported = false;
        for (int i = 0; i < eplan.horizon() && ! disjoint_reported; ++i)
            for (int j = i + 1; j < eplan.horizon() && ! disjoint_reported; ++j) {
                auto common = set_intersect(eplan.semesters[i], eplan.semesters[j]);
                if (! common.empty()) {
                    report.violations.push_back(Violation{"exam_temporal disjoint_tasks",
                        "task " + *common.begin() + " occurs in semesters " + std::to_string(i + 1) + " and "
                            + std::to_string(j + 1)});
                    disjoint_reported = true;
                }
            }

        for (std::size_t k = 0; k < exam.dependencies.size(); ++k) {
            const auto & dep = exam.dependencies[k];
            if (! dependency_holds(dep, eplan))
                report.violations.push_back(
                    Violation{"exam_temporal dependency[" + std::to_string(k) + "] (" + to_string(dep.secondary_options)
                            + "," + to_string(dep.primary) + ")",
                        "no secondary option completed by semester " + std::to_string(first_semester(dep.primary, eplan))
                            + " when " + to_string(dep.primary) + " is first taken"});
        }

        check_constraints(exam.global_constraints, "exam_global", ctx, report);
        check_constraints(exam.temporal_constraints, "exam_temporal", ctx, report);
        return report;
    }
}
