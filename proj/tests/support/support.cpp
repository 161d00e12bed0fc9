#include "support.hpp"

#include <regula/semantics.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace regula::testing
{
    auto data_dir() -> std::filesystem::path { return REGULA_DATA_DIR; }

    auto read_file(const std::filesystem::path & path) -> std::string
    {
        std::ifstream in(path, std::ios::binary);
        if (! in)
            throw std::runtime_error("cannot read " + path.string());
        std::ostringstream out;
        out << in.rdbuf();
        return out.str();
    }

    auto load(const std::vector<std::string> & names) -> dsl::Instance
    {
        std::string text;
        for (const auto & name : names)
            text += read_file(data_dir() / name) + "\n";
        return dsl::parse_instance(text);
    }

    auto cogsys() -> dsl::Instance { return load({"cogsys.reg"}); }
    auto cogsys_with_exams() -> dsl::Instance { return load({"cogsys.reg", "cogsys_exams.reg"}); }
    auto toy() -> dsl::Instance { return load({"toy.reg"}); }

    auto cogsys_plan() -> StudyPlan
    {
        return StudyPlan{{
            {"bm1", "bm3", "fm1", "am12"},
            {"bm2", "am21", "pm1"},
            {"im", "pm3", "am31"},
            {"msc"},
        }};
    }

    auto request(const dsl::Instance & instance, int horizon, solver::Mode mode) -> solver::SolveRequest
    {
        solver::SolveRequest r;
        r.regulation = instance.regulation;
        r.exam = instance.exam;
        r.horizon = horizon;
        r.mode = mode;
        return r;
    }

    auto sorted(std::vector<solver::Solution> solutions) -> std::vector<solver::Solution>
    {
        std::sort(solutions.begin(), solutions.end());
        return solutions;
    }

    auto aggregate(const std::vector<solver::Solution> & solutions, int horizon) -> ConsequenceReport
    {
        ConsequenceReport r;
        r.satisfiable = ! solutions.empty();
        r.semesters.resize(static_cast<std::size_t>(horizon));
        for (int i = 0; i < horizon; ++i) {
            auto & cell = r.semesters[static_cast<std::size_t>(i)];
            bool first = true;
            for (const auto & s : solutions) {
                const IdSet & row = s.plan.semesters[static_cast<std::size_t>(i)];
                cell.possible.insert(row.begin(), row.end());
                if (first)
                    cell.forced = row;
                else
                    std::erase_if(cell.forced, [&](const Id & m) { return ! row.contains(m); });
                first = false;
            }
        }
        return r;
    }

    auto enumerate(const solver::SolveRequest & req) -> std::vector<solver::Solution>
    {
        const bool exam_mode = req.mode == solver::Mode::exam;
        std::vector<Id> elements;
        if (exam_mode) {
            elements.assign(req.exam->primary_tasks.begin(), req.exam->primary_tasks.end());
            elements.insert(elements.end(), req.exam->secondary_tasks.begin(), req.exam->secondary_tasks.end());
        }
        else {
            elements.assign(req.regulation.modules.begin(), req.regulation.modules.end());
        }

        std::vector<solver::Solution> out;
        std::vector<IdSet> rows(static_cast<std::size_t>(req.horizon));
        auto holds = [&](const StudyPlan & plan) {
            for (const auto & a : req.assumptions) {
                bool in = plan.semesters[static_cast<std::size_t>(a.semester - 1)].contains(a.module);
                if (in != (a.polarity == Polarity::assigned))
                    return false;
            }
            return true;
        };
        std::function<void(std::size_t)> place = [&](std::size_t k) {
            if (k == elements.size()) {
                solver::Solution s;
                if (exam_mode) {
                    ExamPlan eplan{rows};
                    s.plan = semantics::induce(eplan, *req.exam, req.regulation.modules);
                    if (! semantics::validate_exam_plan(req.regulation, *req.exam, eplan).admissible())
                        return;
                    s.exam_plan = eplan;
                }
                else {
                    s.plan = StudyPlan{rows};
                    if (! semantics::validate_study_plan(req.regulation, s.plan).admissible())
                        return;
                }
                if (holds(s.plan))
                    out.push_back(std::move(s));
                return;
            }
            place(k + 1);
            for (auto & row : rows) {
                row.insert(elements[k]);
                place(k + 1);
                row.erase(elements[k]);
            }
        };
        place(0);
        return out;
    }

    Generator::Generator(std::uint64_t seed, GeneratorOptions options) : _rng(seed), _options(options) {}

    auto Generator::pick(int lo, int hi) -> int { return std::uniform_int_distribution<int>(lo, hi)(_rng); }

    auto Generator::chance(double p) -> bool { return std::bernoulli_distribution(p)(_rng); }

    auto Generator::horizon() -> int { return _horizon = pick(1, _options.max_horizon); }

    auto Generator::subset(const std::vector<Id> & pool, bool nonempty) -> IdSet
    {
        IdSet out;
        for (const auto & e : pool)
            if (chance(0.4))
                out.insert(e);
        if (nonempty && out.empty() && ! pool.empty())
            out.insert(pool[static_cast<std::size_t>(pick(0, static_cast<int>(pool.size()) - 1))]);
        return out;
    }

    auto Generator::comparison(long long scale) -> Comparison
    {
        const auto bound = static_cast<long long>(pick(0, static_cast<int>(std::max(1LL, scale))));
        switch (pick(0, 5)) {
        case 0: return leq(bound);
        case 1: return geq(bound);
        case 2: return eq(bound);
        case 3: return Comparison{CompareOp::lt, bound, 0};
        case 4: return Comparison{CompareOp::gt, bound, 0};
        default: return between_bounds(bound, bound + pick(0, static_cast<int>(std::max(1LL, scale / 2))));
        }
    }

    auto Generator::set_expr(int depth, bool exam) -> SetExpr
    {
        if (depth <= 0 || chance(0.35)) {
            switch (pick(0, exam ? 10 : 8)) {
            case 0: return SetExpr::plan_union();
            case 1: return SetExpr::semester(pick(1, _horizon + 1));
            case 2: return SetExpr::semesters(chance(0.5) ? SemesterIndex::Kind::even : SemesterIndex::Kind::odd);
            case 3: return SetExpr::season_set(chance(0.5) ? Turnus::winter : Turnus::summer);
            case 4: return SetExpr::repeated();
            case 5: return SetExpr::named(reserved::modules);
            case 6:
                if (! _sets.empty())
                    return SetExpr::named(_sets[static_cast<std::size_t>(pick(0, static_cast<int>(_sets.size()) - 1))]);
                return SetExpr::literal(subset(_modules, false));
            case 7: return SetExpr::literal(subset(_modules, chance(0.8)));
            case 8: {
                Family f;
                for (int i = pick(1, 2); i > 0; --i)
                    f.insert(subset(_modules, false));
                return SetExpr::expand(SetExpr::family(f));
            }
            case 9: return SetExpr::exam_union();
            default: return SetExpr::literal(subset(_tasks, true));
            }
        }
        switch (pick(0, 7)) {
        case 0: return SetExpr::intersect(set_expr(depth - 1, exam), set_expr(depth - 1, exam));
        case 1: return SetExpr::unite(set_expr(depth - 1, exam), set_expr(depth - 1, exam));
        case 2: return SetExpr::difference(set_expr(depth - 1, exam), set_expr(depth - 1, exam));
        case 3: return SetExpr::complement(set_expr(depth - 1, exam));
        case 4: return SetExpr::before(set_expr(depth - 1, exam));
        case 5: return SetExpr::after(set_expr(depth - 1, exam));
        case 6: return SetExpr::between(set_expr(depth - 1, exam), set_expr(depth - 1, exam));
        default: return SetExpr::intersect(SetExpr::plan_union(), set_expr(depth - 1, exam));
        }
    }

    auto Generator::constraint(int depth, bool exam) -> ConstraintExpr
    {
        const int d = pick(0, 2);
        // Weighted sums only see modules: every module has credits and a value of wt.
        auto modules_of = [](SetExpr e) { return SetExpr::intersect(std::move(e), SetExpr::named(reserved::modules)); };
        switch (pick(0, depth > 0 ? 11 : 9)) {
        case 0: return ConstraintExpr::empty(set_expr(d, exam));
        case 1: return ConstraintExpr::subseteq(set_expr(d, exam), set_expr(d, exam));
        case 2: return ConstraintExpr::equal(set_expr(d, exam), set_expr(d, exam));
        case 3: return ConstraintExpr::subset(set_expr(d, exam), set_expr(d, exam));
        case 4: return ConstraintExpr::supset(set_expr(d, exam), set_expr(d, exam));
        case 5: return ConstraintExpr::card(set_expr(d, exam), comparison(static_cast<long long>(_modules.size())));
        case 6: return ConstraintExpr::sum(modules_of(set_expr(d, exam)), "c", comparison(_credit_total));
        case 7: return ConstraintExpr::sum(modules_of(set_expr(d, exam)), "wt", comparison(6));
        case 8: {
            Family f;
            for (int i = pick(1, 3); i > 0; --i)
                f.insert(subset(_modules, false));
            return ConstraintExpr::in_family(SetExpr::intersect(SetExpr::plan_union(), set_expr(d, exam)), SetExpr::family(f));
        }
        case 9: return ConstraintExpr::supseteq(set_expr(d, exam), set_expr(d, exam));
        case 10: return ConstraintExpr::implies(constraint(depth - 1, exam), constraint(depth - 1, exam));
        default: return ConstraintExpr::neg(constraint(depth - 1, exam));
        }
    }

    auto Generator::regulation() -> Regulation
    {
        Regulation reg;
        _modules.clear();
        _sets.clear();
        _tasks.clear();
        _credit_total = 0;

        const int count = pick(1, _options.max_modules);
        for (int i = 0; i < count; ++i) {
            Id m = "x" + std::to_string(i);
            _modules.push_back(m);
            reg.modules.insert(m);
            const long long c = pick(1, 9);
            reg.credits[m] = c;
            _credit_total += c;
            reg.turnus[m] = static_cast<Turnus>(pick(0, 2));
            reg.functions["wt"][m] = pick(-3, 3);
        }

        for (int g = pick(0, 2); g > 0; --g) {
            Id name = "g" + std::to_string(g);
            IdSet members = subset(_modules, true);
            // Bounds around the credits of a random subset of the members, so that they can be met.
            long long lo = 0;
            for (const auto & m : members)
                if (chance(0.5))
                    lo += reg.credits[m];
            const long long hi = lo + pick(0, 3);
            reg.sets[name] = members;
            reg.groups.insert(name);
            _sets.push_back(name);
            reg.lower[name] = lo;
            reg.upper[name] = hi;
            reg.global_constraints.push_back(
                ConstraintExpr::sum(SetExpr::intersect(SetExpr::plan_union(), SetExpr::named(name)), "c", between_bounds(lo, hi)));
        }
        if (chance(0.3)) {
            reg.sets["aux"] = subset(_modules, true);
            _sets.push_back("aux");
        }
        if (chance(0.5))
            reg.global_constraints.push_back(
                ConstraintExpr::sum(SetExpr::plan_union(), "c", comparison(_credit_total)));

        if (chance(0.9))
            reg.temporal_constraints.push_back(ConstraintExpr::empty(SetExpr::repeated()));
        if (chance(0.8)) {
            reg.temporal_constraints.push_back(ConstraintExpr::empty(SetExpr::intersect(
                SetExpr::season_set(Turnus::winter), SetExpr::semesters(SemesterIndex::Kind::even))));
            reg.temporal_constraints.push_back(ConstraintExpr::empty(SetExpr::intersect(
                SetExpr::season_set(Turnus::summer), SetExpr::semesters(SemesterIndex::Kind::odd))));
        }

        for (int k = pick(0, _options.max_extra_constraints); k > 0; --k) {
            auto c = constraint(1, false);
            (chance(0.5) ? reg.global_constraints : reg.temporal_constraints).push_back(std::move(c));
        }
        return reg;
    }

    auto Generator::exam(const Regulation & reg) -> ExamSpec
    {
        ExamSpec spec;
        std::vector<Id> owners(reg.modules.begin(), reg.modules.end());
        std::shuffle(owners.begin(), owners.end(), _rng);

        int budget = _options.max_tasks;
        int serial = 0;
        for (const auto & m : owners) {
            if (budget <= 0)
                break;
            std::vector<Id> primary;
            std::vector<Id> secondary;
            for (int i = pick(1, std::min(2, budget)); i > 0; --i, --budget)
                primary.push_back("p" + std::to_string(serial++));
            for (int i = pick(0, std::min(2, budget)); i > 0; --i, --budget)
                secondary.push_back("q" + std::to_string(serial++));
            spec.primary_tasks.insert(primary.begin(), primary.end());
            spec.secondary_tasks.insert(secondary.begin(), secondary.end());

            Family ep;
            for (int i = pick(1, 2); i > 0; --i)
                ep.insert(subset(primary, true));
            spec.primary_options[m] = ep;
            Family es;
            if (secondary.empty())
                es.insert(IdSet{});
            for (int i = secondary.empty() ? 0 : pick(1, 2); i > 0; --i)
                es.insert(subset(secondary, chance(0.7)));
            spec.secondary_options[m] = es;

            if (! secondary.empty() && chance(0.5)) {
                Dependency dep;
                dep.secondary_options.insert(subset(secondary, true));
                if (chance(0.3))
                    dep.secondary_options.insert(subset(secondary, false));
                dep.primary = subset(primary, true);
                spec.dependencies.push_back(dep);
            }
        }

        _tasks.assign(spec.primary_tasks.begin(), spec.primary_tasks.end());
        _tasks.insert(_tasks.end(), spec.secondary_tasks.begin(), spec.secondary_tasks.end());
        for (int k = pick(0, 2); k > 0; --k) {
            auto c = constraint(0, true);
            (chance(0.5) ? spec.global_constraints : spec.temporal_constraints).push_back(std::move(c));
        }
        return spec;
    }

    auto Generator::assumption(const Regulation & reg, int horizon) -> Assumption
    {
        std::vector<Id> modules(reg.modules.begin(), reg.modules.end());
        Assumption a;
        a.module = modules[static_cast<std::size_t>(pick(0, static_cast<int>(modules.size()) - 1))];
        a.semester = pick(1, horizon);
        a.polarity = chance(0.5) ? Polarity::assigned : Polarity::excluded;
        // Assigned semesters mostly follow the module's season.
        const Turnus t = reg.turnus.at(a.module);
        const bool fits = t == Turnus::every || ((a.semester % 2 == 1) == (t == Turnus::winter));
        if (a.polarity == Polarity::assigned && ! fits && chance(0.8) && a.semester + 1 <= horizon)
            ++a.semester;
        return a;
    }

    namespace
    {
        auto describe(const std::vector<solver::Solution> & solutions) -> std::string
        {
            std::string out;
            for (const auto & s : solutions)
                out += "  " + (s.exam_plan ? dsl::format_pairs(StudyPlan{s.exam_plan->semesters}) + " => " : "")
                    + dsl::format_pairs(s.plan) + "\n";
            return out;
        }
    }

    auto oracle_case(std::uint64_t seed, bool exam_mode) -> CaseOutcome
    {
        CaseOutcome out;
        GeneratorOptions options;
        // Three modules so that every module can own tasks within the task limit.
        if (exam_mode)
            options.max_modules = 3;
        // Most cases ask for a satisfiable instance and retry generation with derived seeds until one is.
        std::mt19937_64 coin(seed);
        const bool want_satisfiable = std::bernoulli_distribution(0.7)(coin);
        dsl::Instance inst;
        solver::SolveRequest req;
        int n = 1;
        for (std::uint64_t attempt = 0; attempt < 40; ++attempt) {
            Generator gen(seed * 1000 + attempt, options);
            n = gen.horizon();
            inst = dsl::Instance{gen.regulation(), std::nullopt};
            if (exam_mode)
                inst.exam = gen.exam(inst.regulation);
            req = request(inst, n, exam_mode ? solver::Mode::exam : solver::Mode::study);
            for (int k = gen.pick(0, 2); k > 0; --k)
                req.assumptions.push_back(gen.assumption(inst.regulation, n));
            if (! want_satisfiable)
                break;
            auto probe = req;
            probe.model_limit = 1;
            if (! check_wellformed(inst.regulation, inst.exam ? &*inst.exam : nullptr).admissible()
                || ! solver::solve(probe).solutions.empty())
                break;
        }

        out.instance = dsl::serialize(inst) + "horizon " + std::to_string(n) + "\n";
        for (const auto & a : req.assumptions)
            out.instance += "assume " + a.module + "@" + std::to_string(a.semester)
                + (a.polarity == Polarity::assigned ? "" : " excluded") + "\n";
        auto fail = [&](const std::string & what) {
            out.ok = false;
            out.detail = "seed " + std::to_string(seed) + (exam_mode ? " (exam)" : " (study)") + ": " + what
                + "\ninstance:\n" + out.instance;
            return out;
        };

        auto wellformed = check_wellformed(inst.regulation, inst.exam ? &*inst.exam : nullptr);
        if (! wellformed.admissible())
            return fail("generated instance is not well-formed\n" + to_string(wellformed));

        try {
            auto solved = solver::solve(req);
            auto oracle = solver::brute_force_oracle(req);
            auto independent = enumerate(req);
            out.solutions = oracle.size();
            if (solved.unknown())
                return fail("unlimited search reported unknown");
            if (sorted(solved.solutions) != sorted(oracle))
                return fail("solve differs from the oracle\nsolve:\n" + describe(solved.solutions) + "oracle:\n"
                    + describe(oracle));
            if (solved.solutions != oracle)
                return fail("solve order differs from the oracle order");
            if (sorted(independent) != sorted(oracle))
                return fail("oracle differs from plain enumeration\noracle:\n" + describe(oracle) + "enumeration:\n"
                    + describe(independent));

            auto report = solver::consequences(req);
            auto expected = aggregate(oracle, n);
            if (! report.complete)
                return fail("consequences incomplete without a budget");
            if (report.satisfiable != expected.satisfiable)
                return fail("consequences satisfiability differs");
            for (int i = 0; i < n; ++i) {
                const auto & got = report.semesters[static_cast<std::size_t>(i)];
                const auto & want = expected.semesters[static_cast<std::size_t>(i)];
                if (got.forced != want.forced || got.possible != want.possible || ! got.unknown.empty())
                    return fail("consequences differ in semester " + std::to_string(i + 1) + ": forced "
                        + to_string(got.forced) + " vs " + to_string(want.forced) + ", possible " + to_string(got.possible)
                        + " vs " + to_string(want.possible));
            }
        }
        catch (const std::exception & e) {
            return fail(std::string("exception: ") + e.what());
        }
        return out;
    }
}
