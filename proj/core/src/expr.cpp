#include <regula/expr.hpp>

#include <utility>

using std::move;
using std::string;

namespace regula
{
    auto turnus_code(Turnus t) -> char
    {
        switch (t) {
        case Turnus::winter: return 'w';
        case Turnus::summer: return 's';
        case Turnus::every: return 'e';
        }
        return '?';
    }

    auto SemesterIndex::selects(int semester) const noexcept -> bool
    {
        switch (kind) {
        case Kind::single: return semester == value;
        case Kind::even: return semester % 2 == 0;
        case Kind::odd: return semester % 2 == 1;
        }
        return false;
    }

    namespace
    {
        auto node(SetOp op) -> SetExpr
        {
            SetExpr e;
            e.op = op;
            return e;
        }

        auto node(SetOp op, SetExpr a) -> SetExpr
        {
            auto e = node(op);
            e.args.push_back(move(a));
            return e;
        }

        auto node(SetOp op, SetExpr a, SetExpr b) -> SetExpr
        {
            auto e = node(op);
            e.args.push_back(move(a));
            e.args.push_back(move(b));
            return e;
        }

        auto cnode(ConstraintOp op, std::vector<SetExpr> sets) -> ConstraintExpr
        {
            ConstraintExpr c;
            c.op = op;
            c.sets = move(sets);
            return c;
        }
    }

    auto SetExpr::named(Id name) -> SetExpr
    {
        auto e = node(SetOp::named);
        e.name = move(name);
        return e;
    }

    auto SetExpr::plan_union() -> SetExpr { return node(SetOp::plan_union); }

    auto SetExpr::semester(int i) -> SetExpr
    {
        auto e = node(SetOp::semester);
        e.index = SemesterIndex{SemesterIndex::Kind::single, i};
        return e;
    }

    auto SetExpr::semesters(SemesterIndex::Kind parity) -> SetExpr
    {
        auto e = node(SetOp::semester);
        e.index = SemesterIndex{parity, 0};
        return e;
    }

    auto SetExpr::season_set(Turnus t) -> SetExpr
    {
        auto e = node(SetOp::season);
        e.season = t;
        return e;
    }

    auto SetExpr::exam_union() -> SetExpr { return node(SetOp::exam_union); }
    auto SetExpr::repeated() -> SetExpr { return node(SetOp::repeated); }
    auto SetExpr::intersect(SetExpr a, SetExpr b) -> SetExpr { return node(SetOp::intersect, move(a), move(b)); }
    auto SetExpr::unite(SetExpr a, SetExpr b) -> SetExpr { return node(SetOp::unite, move(a), move(b)); }
    auto SetExpr::difference(SetExpr a, SetExpr b) -> SetExpr { return node(SetOp::difference, move(a), move(b)); }
    auto SetExpr::complement(SetExpr a) -> SetExpr { return node(SetOp::complement, move(a)); }
    auto SetExpr::before(SetExpr a) -> SetExpr { return node(SetOp::before, move(a)); }
    auto SetExpr::after(SetExpr a) -> SetExpr { return node(SetOp::after, move(a)); }
    auto SetExpr::between(SetExpr a, SetExpr b) -> SetExpr { return node(SetOp::between, move(a), move(b)); }
    auto SetExpr::expand(SetExpr f) -> SetExpr { return node(SetOp::expand, move(f)); }

    auto SetExpr::literal(IdSet elements) -> SetExpr
    {
        auto e = node(SetOp::literal);
        e.elements = move(elements);
        return e;
    }

    auto SetExpr::family(Family members) -> SetExpr
    {
        auto e = node(SetOp::family);
        e.members = move(members);
        return e;
    }

    auto Comparison::accepts(long long value) const noexcept -> bool
    {
        switch (op) {
        case CompareOp::leq: return value <= bound;
        case CompareOp::geq: return value >= bound;
        case CompareOp::eq: return value == bound;
        case CompareOp::lt: return value < bound;
        case CompareOp::gt: return value > bound;
        case CompareOp::bw: return bound <= value && value <= upper;
        }
        return false;
    }

    auto leq(long long bound) -> Comparison { return Comparison{CompareOp::leq, bound, 0}; }
    auto geq(long long bound) -> Comparison { return Comparison{CompareOp::geq, bound, 0}; }
    auto eq(long long bound) -> Comparison { return Comparison{CompareOp::eq, bound, 0}; }
    auto between_bounds(long long lower, long long upper) -> Comparison { return Comparison{CompareOp::bw, lower, upper}; }

    auto ConstraintExpr::empty(SetExpr a) -> ConstraintExpr { return cnode(ConstraintOp::empty, {move(a)}); }
    auto ConstraintExpr::equal(SetExpr a, SetExpr b) -> ConstraintExpr { return cnode(ConstraintOp::equal, {move(a), move(b)}); }
    auto ConstraintExpr::subseteq(SetExpr a, SetExpr b) -> ConstraintExpr { return cnode(ConstraintOp::subseteq, {move(a), move(b)}); }
    auto ConstraintExpr::subset(SetExpr a, SetExpr b) -> ConstraintExpr { return cnode(ConstraintOp::subset, {move(a), move(b)}); }
    auto ConstraintExpr::supseteq(SetExpr a, SetExpr b) -> ConstraintExpr { return cnode(ConstraintOp::supseteq, {move(a), move(b)}); }
    auto ConstraintExpr::supset(SetExpr a, SetExpr b) -> ConstraintExpr { return cnode(ConstraintOp::supset, {move(a), move(b)}); }

    auto ConstraintExpr::card(SetExpr a, Comparison c) -> ConstraintExpr
    {
        auto e = cnode(ConstraintOp::card, {move(a)});
        e.comparison = c;
        return e;
    }

    auto ConstraintExpr::sum(SetExpr a, Id function, Comparison c) -> ConstraintExpr
    {
        auto e = cnode(ConstraintOp::sum, {move(a)});
        e.function = move(function);
        e.comparison = c;
        return e;
    }

    auto ConstraintExpr::implies(ConstraintExpr p, ConstraintExpr q) -> ConstraintExpr
    {
        ConstraintExpr e;
        e.op = ConstraintOp::implies;
        e.args.push_back(move(p));
        e.args.push_back(move(q));
        return e;
    }

    auto ConstraintExpr::neg(ConstraintExpr p) -> ConstraintExpr
    {
        ConstraintExpr e;
        e.op = ConstraintOp::neg;
        e.args.push_back(move(p));
        return e;
    }

    auto ConstraintExpr::in_family(SetExpr a, SetExpr f) -> ConstraintExpr { return cnode(ConstraintOp::in_family, {move(a), move(f)}); }

    auto to_string(const IdSet & s) -> string
    {
        string out = "{";
        bool first = true;
        for (const auto & e : s) {
            if (! first)
                out += ',';
            out += e;
            first = false;
        }
        return out + "}";
    }

    auto to_string(const Family & f) -> string
    {
        string out = "{";
        bool first = true;
        for (const auto & s : f) {
            if (! first)
                out += ',';
            out += to_string(s);
            first = false;
        }
        return out + "}";
    }

    auto to_string(const SetExpr & e) -> string
    {
        auto call = [&](const char * f) {
            string out = string(f) + "(";
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i)
                    out += ',';
                out += to_string(e.args[i]);
            }
            return out + ")";
        };

        switch (e.op) {
        case SetOp::named: return e.name;
        case SetOp::plan_union: return "s";
        case SetOp::semester:
            switch (e.index.kind) {
            case SemesterIndex::Kind::single: return "s(" + std::to_string(e.index.value) + ")";
            case SemesterIndex::Kind::even: return "s(even)";
            case SemesterIndex::Kind::odd: return "s(odd)";
            }
            break;
        case SetOp::season: return string("m(") + turnus_code(e.season) + ")";
        case SetOp::exam_union: return "ee";
        case SetOp::repeated: return "repeated";
        case SetOp::intersect: return call("int");
        case SetOp::unite: return call("union");
        case SetOp::difference: return call("diff");
        case SetOp::complement: return call("comp");
        case SetOp::before: return call("before");
        case SetOp::after: return call("after");
        case SetOp::between: return call("between");
        case SetOp::expand: return call("expand");
        case SetOp::literal: return to_string(e.elements);
        case SetOp::family: return to_string(e.members);
        }
        return "?";
    }

    auto to_string(CompareOp op) -> string
    {
        switch (op) {
        case CompareOp::leq: return "leq";
        case CompareOp::geq: return "geq";
        case CompareOp::eq: return "eq";
        case CompareOp::lt: return "lt";
        case CompareOp::gt: return "gt";
        case CompareOp::bw: return "bw";
        }
        return "?";
    }

    auto to_string(const Comparison & c) -> string
    {
        if (c.op == CompareOp::bw)
            return "bw,(" + std::to_string(c.bound) + "," + std::to_string(c.upper) + ")";
        return to_string(c.op) + "," + std::to_string(c.bound);
    }

    auto to_string(const ConstraintExpr & c) -> string
    {
        auto sets = [&](const char * f) {
            string out = string(f) + "(";
            for (std::size_t i = 0; i < c.sets.size(); ++i) {
                if (i)
                    out += ',';
                out += to_string(c.sets[i]);
            }
            return out + ")";
        };

        switch (c.op) {
        case ConstraintOp::empty: return sets("empty");
        case ConstraintOp::equal: return sets("equal");
        case ConstraintOp::subseteq: return sets("subseteq");
        case ConstraintOp::subset: return sets("subset");
        case ConstraintOp::supseteq: return sets("supseteq");
        case ConstraintOp::supset: return sets("supset");
        case ConstraintOp::in_family: return sets("in_fam");
        case ConstraintOp::card: return "card(" + to_string(c.sets.at(0)) + "," + to_string(c.comparison) + ")";
        case ConstraintOp::sum:
            return "sum(" + to_string(c.sets.at(0)) + "," + c.function + "," + to_string(c.comparison) + ")";
        case ConstraintOp::implies: return "implies(" + to_string(c.args.at(0)) + "," + to_string(c.args.at(1)) + ")";
        case ConstraintOp::neg: return "neg(" + to_string(c.args.at(0)) + ")";
        }
        return "?";
    }
}
