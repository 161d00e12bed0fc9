#include <regula/model.hpp>

#include <algorithm>
#include <functional>
#include <sstream>

using std::map;
using std::optional;
using std::string;

namespace regula
{
    auto Regulation::find_set(const Id & name) const -> const IdSet *
    {
        if (name == reserved::modules)
            return &modules;
        auto it = sets.find(name);
        return it == sets.end() ? nullptr : &it->second;
    }

    auto Regulation::find_function(const Id & name) const -> optional<map<Id, long long>>
    {
        if (name == "c")
            return credits;
        if (name == "l")
            return lower;
        if (name == "u")
            return upper;
        if (auto it = functions.find(name); it != functions.end())
            return it->second;
        return std::nullopt;
    }

    auto Regulation::modules_of_season(Turnus t) const -> IdSet
    {
        IdSet out;
        for (const auto & [m, s] : turnus)
            if (s == t && modules.contains(m))
                out.insert(m);
        return out;
    }

    auto ExamSpec::kind_of(const Id & task) const -> optional<TaskKind>
    {
        if (primary_tasks.contains(task))
            return TaskKind::primary;
        if (secondary_tasks.contains(task))
            return TaskKind::secondary;
        return std::nullopt;
    }

    auto ExamSpec::owner_of(const Id & task) const -> optional<Id>
    {
        for (const auto * options : {&primary_options, &secondary_options})
            for (const auto & [m, fam] : *options)
                for (const auto & combo : fam)
                    if (combo.contains(task))
                        return m;
        return std::nullopt;
    }

    auto ExamSpec::tasks_of(const Id & module) const -> IdSet
    {
        IdSet out;
        for (const auto * options : {&primary_options, &secondary_options})
            if (auto it = options->find(module); it != options->end())
                for (const auto & combo : it->second)
                    out.insert(combo.begin(), combo.end());
        return out;
    }

    auto StudyPlan::all_modules() const -> IdSet
    {
        IdSet out;
        for (const auto & s : semesters)
            out.insert(s.begin(), s.end());
        return out;
    }

    auto ExamPlan::all_tasks() const -> IdSet
    {
        IdSet out;
        for (const auto & s : semesters)
            out.insert(s.begin(), s.end());
        return out;
    }

    namespace
    {
        struct Checker
        {
            const Regulation & reg;
            const ExamSpec * exam;
            ValidationReport report;

            void fail(string reason) { report.violations.push_back(Violation{"wellformed", std::move(reason)}); }

            auto is_element(const Id & e) const -> bool
            {
                return reg.modules.contains(e) || (exam && exam->kind_of(e).has_value());
            }

            // Returns true when the expression denotes a family.
            auto check_set(const SetExpr & e, const string & where) -> bool
            {
                switch (e.op) {
                case SetOp::named:
                    if (! reg.find_set(e.name))
                        fail("undeclared set '" + e.name + "' in " + where);
                    return false;
                case SetOp::semester:
                    if (e.index.kind == SemesterIndex::Kind::single && e.index.value < 1)
                        fail("semester index below 1 in " + where);
                    return false;
                case SetOp::exam_union:
                case SetOp::plan_union:
                case SetOp::season:
                case SetOp::repeated:
                case SetOp::literal:
                    return false;
                case SetOp::family:
                    return true;
                case SetOp::expand:
                    if (! check_set(e.args.at(0), where))
                        fail("expand applied to a flat set in " + where);
                    return false;
                default:
                    for (const auto & a : e.args)
                        if (check_set(a, where))
                            fail("set operator applied to a set of sets in " + where);
                    return false;
                }
            }

            void check_constraint(const ConstraintExpr & c, const string & where)
            {
                switch (c.op) {
                case ConstraintOp::implies:
                case ConstraintOp::neg:
                    for (const auto & a : c.args)
                        check_constraint(a, where);
                    return;
                case ConstraintOp::in_family:
                    if (check_set(c.sets.at(0), where))
                        fail("in_fam expects a flat first argument in " + where);
                    if (! check_set(c.sets.at(1), where))
                        fail("in_fam expects a set of sets as second argument in " + where);
                    return;
                case ConstraintOp::sum:
                    if (! reg.find_function(c.function))
                        fail("undeclared function '" + c.function + "' in " + where);
                    [[fallthrough]];
                default:
                    for (const auto & s : c.sets)
                        if (check_set(s, where))
                            fail("constraint over a set of sets in " + where);
                    if ((c.op == ConstraintOp::card || c.op == ConstraintOp::sum) && c.comparison.op == CompareOp::bw
                        && c.comparison.bound > c.comparison.upper)
                        fail("empty bw interval in " + where);
                }
            }

            void check_constraints(const std::vector<ConstraintExpr> & cs, const string & section)
            {
                for (std::size_t i = 0; i < cs.size(); ++i)
                    check_constraint(cs[i], section + "[" + std::to_string(i) + "] " + to_string(cs[i]));
            }

            void run()
            {
                if (reg.modules.empty())
                    fail("no modules");

                for (const auto & [name, members] : reg.sets)
                    for (const auto & e : members)
                        if (! is_element(e))
                            fail("undeclared module '" + e + "' in set '" + name + "'");

                for (const auto & g : reg.groups)
                    if (! reg.find_set(g))
                        fail("undeclared group '" + g + "'");

                for (const auto & [m, c] : reg.credits) {
                    if (! reg.modules.contains(m))
                        fail("credits for undeclared module '" + m + "'");
                    if (c < 0)
                        fail("negative credits for '" + m + "'");
                }
                for (const auto & [m, t] : reg.turnus)
                    if (! reg.modules.contains(m))
                        fail("turnus for undeclared module '" + m + "'");

                for (const auto & m : reg.modules) {
                    if (! reg.credits.contains(m))
                        fail("missing credits for module '" + m + "'");
                    if (! reg.turnus.contains(m))
                        fail("missing turnus for module '" + m + "'");
                }

                for (const auto * bounds : {&reg.lower, &reg.upper})
                    for (const auto & [g, v] : *bounds) {
                        if (! reg.groups.contains(g))
                            fail("credit bound for undeclared group '" + g + "'");
                        if (v < 0)
                            fail("negative credit bound for '" + g + "'");
                    }

                for (const auto & [g, lo] : reg.lower)
                    if (auto it = reg.upper.find(g); it != reg.upper.end() && lo > it->second)
                        fail("lower exceeds upper for group '" + g + "' (" + std::to_string(lo) + " > "
                            + std::to_string(it->second) + ")");

                check_constraints(reg.global_constraints, "global");
                check_constraints(reg.temporal_constraints, "temporal");

                if (exam)
                    check_exam(*exam);
            }

            void check_exam(const ExamSpec & ex)
            {
                for (const auto & t : ex.primary_tasks)
                    if (ex.secondary_tasks.contains(t))
                        fail("task '" + t + "' is both primary and secondary");

                map<Id, Id> owner;
                auto check_options = [&](const map<Id, Family> & options, const IdSet & kind_set, const char * kind) {
                    for (const auto & [m, fam] : options) {
                        if (! reg.modules.contains(m))
                            fail(string(kind) + " options for undeclared module '" + m + "'");
                        for (const auto & combo : fam)
                            for (const auto & t : combo) {
                                if (! kind_set.contains(t))
                                    fail("task '" + t + "' of module '" + m + "' is not a declared " + kind + " task");
                                auto [it, fresh] = owner.emplace(t, m);
                                if (! fresh && it->second != m)
                                    fail("task '" + t + "' shared by modules '" + it->second + "' and '" + m + "'");
                            }
                    }
                };
                check_options(ex.primary_options, ex.primary_tasks, "primary");
                check_options(ex.secondary_options, ex.secondary_tasks, "secondary");

                for (const auto & dep : ex.dependencies) {
                    for (const auto & v : dep.secondary_options)
                        for (const auto & t : v)
                            if (! ex.secondary_tasks.contains(t))
                                fail("dependency references '" + t + "', not a declared secondary task");
                    for (const auto & t : dep.primary)
                        if (! ex.primary_tasks.contains(t))
                            fail("dependency references '" + t + "', not a declared primary task");
                }

                check_constraints(ex.global_constraints, "exam_global");
                check_constraints(ex.temporal_constraints, "exam_temporal");
            }
        };
    }

    auto check_wellformed(const Regulation & reg, const ExamSpec * exam) -> ValidationReport
    {
        Checker checker{reg, exam, {}};
        checker.run();
        return std::move(checker.report);
    }

    auto to_string(const ValidationReport & report) -> string
    {
        if (report.admissible())
            return "admissible\n";
        std::ostringstream out;
        out << "inadmissible\n";
        for (const auto & v : report.violations)
            out << "  " << v.constraint << ": " << v.reason << '\n';
        return out.str();
    }
}
