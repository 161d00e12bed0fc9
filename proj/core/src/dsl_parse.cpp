#include <regula/dsl.hpp>

#include <cctype>
#include <charconv>
#include <map>
#include <utility>

using std::size_t;
using std::string;
using std::string_view;
using std::vector;

namespace regula::dsl
{
    auto operator==(const Term & a, const Term & b) -> bool
    {
        return a.kind == b.kind && a.name == b.name && a.number == b.number && a.args == b.args;
    }

    auto operator==(const Fact & a, const Fact & b) -> bool
    {
        return a.kind == b.kind && a.element == b.element && a.target == b.target && a.value == b.value
            && a.constraint == b.constraint && a.section == b.section;
    }

    auto to_string(const Term & t) -> string
    {
        auto list = [&](char open, char sep, char close) {
            string out(1, open);
            for (size_t i = 0; i < t.args.size(); ++i) {
                if (i)
                    out += sep;
                out += to_string(t.args[i]);
            }
            return out + close;
        };

        switch (t.kind) {
        case Term::Kind::symbol: return t.name;
        case Term::Kind::integer: return std::to_string(t.number);
        case Term::Kind::tuple: return list('(', ',', ')');
        case Term::Kind::function: return t.name + list('(', ',', ')');
        case Term::Kind::set: return list('{', ',', '}');
        case Term::Kind::pool: return list('(', ';', ')');
        }
        return "?";
    }

    namespace
    {
        enum class Tok : std::uint8_t
        {
            ident,
            variable,
            integer,
            lparen,
            rparen,
            lbrace,
            rbrace,
            comma,
            semicolon,
            dot,
            hash,
            end
        };

        struct Token
        {
            Tok kind;
            string text;
            long long number = 0;
            size_t line;
            size_t column;
        };

        class Lexer
        {
        public:
            explicit Lexer(string_view text) :
                _text(text)
            {
            }

            auto next() -> Token
            {
                skip_blank();
                size_t line = _line, column = _column;
                if (_pos >= _text.size())
                    return Token{Tok::end, "", 0, line, column};

                char c = _text[_pos];
                auto single = [&](Tok k) {
                    advance();
                    return Token{k, string(1, c), 0, line, column};
                };

                switch (c) {
                case '(': return single(Tok::lparen);
                case ')': return single(Tok::rparen);
                case '{': return single(Tok::lbrace);
                case '}': return single(Tok::rbrace);
                case ',': return single(Tok::comma);
                case ';': return single(Tok::semicolon);
                case '.': return single(Tok::dot);
                case '#': return single(Tok::hash);
                default: break;
                }

                if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') {
                    size_t start = _pos;
                    advance();
                    while (_pos < _text.size() && std::isdigit(static_cast<unsigned char>(_text[_pos])))
                        advance();
                    string_view digits = _text.substr(start, _pos - start);
                    if (digits == "-")
                        throw ParseError("expected digits after '-'", line, column);
                    long long value = 0;
                    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
                    if (ec != std::errc{} || ptr != digits.data() + digits.size())
                        throw ParseError("integer out of range", line, column);
                    return Token{Tok::integer, string(digits), value, line, column};
                }

                if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                    size_t start = _pos;
                    while (_pos < _text.size()
                        && (std::isalnum(static_cast<unsigned char>(_text[_pos])) || _text[_pos] == '_' || _text[_pos] == '\''))
                        advance();
                    string word(_text.substr(start, _pos - start));
                    bool upper = std::isupper(static_cast<unsigned char>(word[0])) || word[0] == '_';
                    return Token{upper ? Tok::variable : Tok::ident, word, 0, line, column};
                }

                throw ParseError(string("unexpected character '") + c + "'", line, column);
            }

        private:
            void advance()
            {
                if (_text[_pos] == '\n') {
                    ++_line;
                    _column = 1;
                }
                else
                    ++_column;
                ++_pos;
            }

            void skip_blank()
            {
                while (_pos < _text.size()) {
                    char c = _text[_pos];
                    if (c == '%') {
                        while (_pos < _text.size() && _text[_pos] != '\n')
                            advance();
                    }
                    else if (std::isspace(static_cast<unsigned char>(c)))
                        advance();
                    else
                        break;
                }
            }

            string_view _text;
            size_t _pos = 0;
            size_t _line = 1;
            size_t _column = 1;
        };

        class Parser
        {
        public:
            explicit Parser(string_view text) :
                _lexer(text)
            {
                _current = _lexer.next();
            }

            auto at(Tok k) const -> bool { return _current.kind == k; }
            auto current() const -> const Token & { return _current; }

            auto take() -> Token
            {
                Token t = std::move(_current);
                _current = _lexer.next();
                return t;
            }

            auto expect(Tok k, const char * what) -> Token
            {
                if (! at(k))
                    throw ParseError(string("expected ") + what + describe(), _current.line, _current.column);
                return take();
            }

            auto describe() const -> string
            {
                if (at(Tok::end))
                    return " but reached end of input";
                return " but found '" + _current.text + "'";
            }

            auto term() -> Term
            {
                const Token & t = _current;
                Term out;
                out.line = t.line;
                out.column = t.column;

                switch (t.kind) {
                case Tok::integer:
                    out.kind = Term::Kind::integer;
                    out.number = take().number;
                    return out;
                case Tok::variable:
                    throw ParseError("variables are not supported in facts ('" + t.text + "')", t.line, t.column);
                case Tok::ident: {
                    out.name = take().text;
                    if (! at(Tok::lparen)) {
                        out.kind = Term::Kind::symbol;
                        return out;
                    }
                    take();
                    auto alternatives = arglist();
                    expect(Tok::rparen, "')'");
                    if (alternatives.size() == 1) {
                        out.kind = Term::Kind::function;
                        out.args = std::move(alternatives.front());
                        return out;
                    }
                    out.kind = Term::Kind::pool;
                    for (auto & alt : alternatives) {
                        Term f;
                        f.kind = Term::Kind::function;
                        f.name = out.name;
                        f.args = std::move(alt);
                        f.line = out.line;
                        f.column = out.column;
                        out.args.push_back(std::move(f));
                    }
                    out.name.clear();
                    return out;
                }
                case Tok::lparen: {
                    take();
                    if (at(Tok::rparen)) {
                        take();
                        out.kind = Term::Kind::tuple;
                        return out;
                    }
                    auto alternatives = arglist();
                    expect(Tok::rparen, "')'");
                    auto group = [&](vector<Term> alt) {
                        if (alt.size() == 1)
                            return std::move(alt.front());
                        Term tup;
                        tup.kind = Term::Kind::tuple;
                        tup.args = std::move(alt);
                        tup.line = out.line;
                        tup.column = out.column;
                        return tup;
                    };
                    if (alternatives.size() == 1)
                        return group(std::move(alternatives.front()));
                    out.kind = Term::Kind::pool;
                    for (auto & alt : alternatives)
                        out.args.push_back(group(std::move(alt)));
                    return out;
                }
                case Tok::lbrace: {
                    take();
                    out.kind = Term::Kind::set;
                    if (! at(Tok::rbrace)) {
                        out.args.push_back(term());
                        while (at(Tok::comma)) {
                            take();
                            out.args.push_back(term());
                        }
                    }
                    expect(Tok::rbrace, "'}'");
                    return out;
                }
                default: throw ParseError("expected a term" + describe(), t.line, t.column);
                }
            }

        private:
            auto arglist() -> vector<vector<Term>>
            {
                vector<vector<Term>> alternatives(1);
                alternatives.back().push_back(term());
                while (at(Tok::comma) || at(Tok::semicolon)) {
                    if (take().kind == Tok::semicolon)
                        alternatives.emplace_back();
                    alternatives.back().push_back(term());
                }
                return alternatives;
            }

            Lexer _lexer;
            Token _current;
        };

        void cross(const vector<Term> & args, size_t i, vector<Term> & prefix, const Term & shape, vector<Term> & out,
            const vector<vector<Term>> & expanded)
        {
            if (i == args.size()) {
                Term t = shape;
                t.args = prefix;
                out.push_back(std::move(t));
                return;
            }
            for (const auto & choice : expanded[i]) {
                prefix.push_back(choice);
                cross(args, i + 1, prefix, shape, out, expanded);
                prefix.pop_back();
            }
        }

        // ---- interpretation of ground terms ----

        [[noreturn]] void fail_at(const Term & t, const string & message) { throw ParseError(message, t.line, t.column); }

        auto symbol(const Term & t, const char * what) -> const string &
        {
            if (t.kind != Term::Kind::symbol)
                fail_at(t, string("expected ") + what + ", found '" + to_string(t) + "'");
            return t.name;
        }

        auto integer(const Term & t, const char * what) -> long long
        {
            if (t.kind != Term::Kind::integer)
                fail_at(t, string("expected ") + what + ", found '" + to_string(t) + "'");
            return t.number;
        }

        auto is_reserved_set_term(const string & name) -> bool { return name == "s" || name == "ee" || name == "repeated"; }

        auto flat_literal(const Term & t) -> IdSet
        {
            IdSet out;
            for (const auto & member : t.args)
                out.insert(symbol(member, "an element identifier"));
            return out;
        }

        auto family_literal(const Term & t) -> Family
        {
            if (t.kind != Term::Kind::set)
                fail_at(t, "expected a set of sets, found '" + to_string(t) + "'");
            Family out;
            for (const auto & member : t.args) {
                if (member.kind != Term::Kind::set)
                    fail_at(member, "expected a set inside a set of sets, found '" + to_string(member) + "'");
                out.insert(flat_literal(member));
            }
            return out;
        }

        auto set_expr(const Term & t, bool family_expected) -> SetExpr;

        auto set_args(const Term & t, size_t arity) -> void
        {
            if (t.args.size() != arity)
                fail_at(t, "set operator '" + t.name + "' expects " + std::to_string(arity) + " argument(s)");
        }

        auto set_expr(const Term & t, bool family_expected) -> SetExpr
        {
            switch (t.kind) {
            case Term::Kind::symbol:
                if (t.name == "s")
                    return SetExpr::plan_union();
                if (t.name == "ee")
                    return SetExpr::exam_union();
                if (t.name == "repeated")
                    return SetExpr::repeated();
                return SetExpr::named(t.name);
            case Term::Kind::set: {
                bool nested = ! t.args.empty() && t.args.front().kind == Term::Kind::set;
                if (nested || (t.args.empty() && family_expected))
                    return SetExpr::family(family_literal(t));
                return SetExpr::literal(flat_literal(t));
            }
            case Term::Kind::function: {
                const string & f = t.name;
                if (f == "s") {
                    set_args(t, 1);
                    const Term & i = t.args[0];
                    if (i.kind == Term::Kind::integer) {
                        if (i.number < 1)
                            fail_at(i, "semester index must be at least 1");
                        return SetExpr::semester(static_cast<int>(i.number));
                    }
                    if (i.kind == Term::Kind::symbol && i.name == "even")
                        return SetExpr::semesters(SemesterIndex::Kind::even);
                    if (i.kind == Term::Kind::symbol && i.name == "odd")
                        return SetExpr::semesters(SemesterIndex::Kind::odd);
                    fail_at(i, "expected a semester number, 'even' or 'odd'");
                }
                if (f == "m") {
                    set_args(t, 1);
                    const string & season = symbol(t.args[0], "a season");
                    if (season == "w")
                        return SetExpr::season_set(Turnus::winter);
                    if (season == "s")
                        return SetExpr::season_set(Turnus::summer);
                    fail_at(t.args[0], "season must be 'w' or 's'");
                }
                if (f == "int" || f == "union" || f == "diff" || f == "between") {
                    set_args(t, 2);
                    auto a = set_expr(t.args[0], false);
                    auto b = set_expr(t.args[1], false);
                    if (f == "int")
                        return SetExpr::intersect(std::move(a), std::move(b));
                    if (f == "union")
                        return SetExpr::unite(std::move(a), std::move(b));
                    if (f == "diff")
                        return SetExpr::difference(std::move(a), std::move(b));
                    return SetExpr::between(std::move(a), std::move(b));
                }
                if (f == "comp" || f == "before" || f == "after") {
                    set_args(t, 1);
                    auto a = set_expr(t.args[0], false);
                    if (f == "comp")
                        return SetExpr::complement(std::move(a));
                    if (f == "before")
                        return SetExpr::before(std::move(a));
                    return SetExpr::after(std::move(a));
                }
                if (f == "expand") {
                    set_args(t, 1);
                    return SetExpr::expand(set_expr(t.args[0], true));
                }
                fail_at(t, "unknown set operator '" + f + "'");
            }
            default: fail_at(t, "expected a set term, found '" + to_string(t) + "'");
            }
        }

        auto comparison(const Term & op_term, const Term & bound) -> Comparison
        {
            const string & op = symbol(op_term, "a comparison operator");
            static const std::map<string, CompareOp> ops{{"leq", CompareOp::leq}, {"geq", CompareOp::geq},
                {"eq", CompareOp::eq}, {"lt", CompareOp::lt}, {"gt", CompareOp::gt}, {"bw", CompareOp::bw}};
            auto it = ops.find(op);
            if (it == ops.end())
                fail_at(op_term, "unknown comparison operator '" + op + "'");
            if (it->second == CompareOp::bw) {
                if (bound.kind != Term::Kind::tuple || bound.args.size() != 2)
                    fail_at(bound, "bw expects a bound pair (L,U)");
                auto lo = integer(bound.args[0], "an integer bound");
                auto hi = integer(bound.args[1], "an integer bound");
                if (lo > hi)
                    fail_at(bound, "bw bounds must satisfy L <= U");
                return between_bounds(lo, hi);
            }
            return Comparison{it->second, integer(bound, "an integer bound"), 0};
        }

        auto is_constraint_predicate(const string & name) -> bool
        {
            static const IdSet names{"empty", "equal", "subseteq", "subset", "supseteq", "supset", "card", "sum",
                "implies", "neg", "in_fam", "in'"};
            return names.contains(name);
        }

        auto constraint(const Term & t) -> ConstraintExpr
        {
            if (t.kind != Term::Kind::function || ! is_constraint_predicate(t.name))
                fail_at(t, "unknown constraint predicate '" + to_string(t) + "'");
            const string & p = t.name;
            auto arity = [&](size_t n) {
                if (t.args.size() != n)
                    fail_at(t, "predicate '" + p + "' expects " + std::to_string(n) + " argument(s)");
            };

            if (p == "empty") {
                arity(1);
                return ConstraintExpr::empty(set_expr(t.args[0], false));
            }
            if (p == "neg") {
                arity(1);
                return ConstraintExpr::neg(constraint(t.args[0]));
            }
            if (p == "implies") {
                arity(2);
                return ConstraintExpr::implies(constraint(t.args[0]), constraint(t.args[1]));
            }
            if (p == "in_fam" || p == "in'") {
                arity(2);
                return ConstraintExpr::in_family(set_expr(t.args[0], false), set_expr(t.args[1], true));
            }
            if (p == "card") {
                arity(3);
                return ConstraintExpr::card(set_expr(t.args[0], false), comparison(t.args[1], t.args[2]));
            }
            if (p == "sum") {
                arity(4);
                return ConstraintExpr::sum(set_expr(t.args[0], false), symbol(t.args[1], "a function name"),
                    comparison(t.args[2], t.args[3]));
            }
            arity(2);
            auto a = set_expr(t.args[0], false);
            auto b = set_expr(t.args[1], false);
            if (p == "equal")
                return ConstraintExpr::equal(std::move(a), std::move(b));
            if (p == "subseteq")
                return ConstraintExpr::subseteq(std::move(a), std::move(b));
            if (p == "subset")
                return ConstraintExpr::subset(std::move(a), std::move(b));
            if (p == "supseteq")
                return ConstraintExpr::supseteq(std::move(a), std::move(b));
            return ConstraintExpr::supset(std::move(a), std::move(b));
        }

        auto section_of(const Token & name) -> Section
        {
            static const std::map<string, Section> sections{{"global", Section::global}, {"temporal", Section::temporal},
                {"exam_global", Section::exam_global}, {"exam_temporal", Section::exam_temporal}};
            auto it = sections.find(name.text);
            if (it == sections.end())
                throw ParseError("unknown section directive '#" + name.text + "'", name.line, name.column);
            return it->second;
        }

        auto ground_fact(const Term & atom, Section section) -> Fact
        {
            Fact f;
            f.section = section;
            f.line = atom.line;
            f.column = atom.column;

            if (atom.kind == Term::Kind::function && atom.name == "in") {
                if (atom.args.size() != 2)
                    fail_at(atom, "in/2 expects two arguments");
                f.kind = Fact::Kind::membership;
                f.element = atom.args[0];
                f.target = symbol(atom.args[1], "a set name");
                if (is_reserved_set_term(f.target))
                    fail_at(atom.args[1], "'" + f.target + "' is a reserved set term and cannot be extended");
                return f;
            }
            if (atom.kind == Term::Kind::function && atom.name == "map") {
                if (atom.args.size() != 3)
                    fail_at(atom, "map/3 expects three arguments");
                f.kind = Fact::Kind::map_entry;
                f.target = symbol(atom.args[0], "a function name");
                f.element = atom.args[1];
                f.value = atom.args[2];
                return f;
            }
            f.kind = Fact::Kind::constraint;
            f.constraint = constraint(atom);
            return f;
        }
    }

    auto parse_term(string_view text) -> Term
    {
        Parser p(text);
        auto t = p.term();
        if (! p.at(Tok::end))
            throw ParseError("trailing input after term" + p.describe(), p.current().line, p.current().column);
        return t;
    }

    auto expand_pool(const Term & term) -> vector<Term>
    {
        switch (term.kind) {
        case Term::Kind::symbol:
        case Term::Kind::integer: return {term};
        case Term::Kind::pool: {
            vector<Term> out;
            for (const auto & alt : term.args) {
                auto sub = expand_pool(alt);
                out.insert(out.end(), std::make_move_iterator(sub.begin()), std::make_move_iterator(sub.end()));
            }
            return out;
        }
        default: {
            vector<vector<Term>> expanded;
            expanded.reserve(term.args.size());
            for (const auto & a : term.args)
                expanded.push_back(expand_pool(a));
            vector<Term> out, prefix;
            cross(term.args, 0, prefix, term, out, expanded);
            return out;
        }
        }
    }

    auto expand_pool(string_view text) -> vector<Term> { return expand_pool(parse_term(text)); }

    auto parse_facts(string_view text) -> FactFile
    {
        Parser p(text);
        FactFile file;
        Section section = Section::global;

        while (! p.at(Tok::end)) {
            if (p.at(Tok::hash)) {
                p.take();
                section = section_of(p.expect(Tok::ident, "a section name after '#'"));
                p.expect(Tok::dot, "'.' after section directive");
                continue;
            }
            auto atom = p.term();
            p.expect(Tok::dot, "'.' at end of fact");
            for (const auto & ground : expand_pool(atom))
                file.facts.push_back(ground_fact(ground, section));
        }
        return file;
    }

    namespace
    {
        template <typename T>
        void set_once(std::map<Id, T> & target, const Id & key, T value, const Fact & f, const char * what)
        {
            auto [it, fresh] = target.emplace(key, value);
            if (! fresh && ! (it->second == value))
                throw ParseError(string("conflicting ") + what + " for '" + key + "'", f.line, f.column);
        }

        struct Resolver
        {
            const Regulation & reg;
            const Fact & fact;

            void check(const SetExpr & e) const
            {
                if (e.op == SetOp::named && ! reg.find_set(e.name))
                    throw ParseError("undeclared identifier '" + e.name + "'", fact.line, fact.column);
                for (const auto & a : e.args)
                    check(a);
            }

            void check(const ConstraintExpr & c) const
            {
                if (c.op == ConstraintOp::sum && ! reg.find_function(c.function))
                    throw ParseError("undeclared identifier '" + c.function + "'", fact.line, fact.column);
                for (const auto & s : c.sets)
                    check(s);
                for (const auto & a : c.args)
                    check(a);
            }
        };
    }

    auto assemble(const FactFile & file) -> Instance
    {
        Instance out;
        Regulation & reg = out.regulation;
        ExamSpec exam;
        bool has_exam = false;

        for (const auto & f : file.facts) {
            if (f.kind != Fact::Kind::membership)
                continue;
            const string & target = f.target;
            if (target == reserved::dependencies) {
                const Term & e = f.element;
                if (e.kind != Term::Kind::tuple || e.args.size() != 2)
                    fail_at(e, "dependency must be a pair (X,W)");
                Dependency dep;
                dep.secondary_options = family_literal(e.args[0]);
                if (e.args[1].kind != Term::Kind::set)
                    fail_at(e.args[1], "dependency target W must be a set literal");
                dep.primary = flat_literal(e.args[1]);
                exam.dependencies.push_back(std::move(dep));
                has_exam = true;
                continue;
            }
            const string & element = symbol(f.element, "an element identifier");
            if (target == reserved::modules)
                reg.modules.insert(element);
            else if (target == reserved::groups)
                reg.groups.insert(element);
            else if (target == reserved::primary_tasks) {
                exam.primary_tasks.insert(element);
                has_exam = true;
            }
            else if (target == reserved::secondary_tasks) {
                exam.secondary_tasks.insert(element);
                has_exam = true;
            }
            else
                reg.sets[target].insert(element);
        }

        for (const auto & f : file.facts) {
            if (f.kind != Fact::Kind::map_entry)
                continue;
            const string & fn = f.target;
            const string & key = symbol(f.element, "a map argument");
            if (fn == "c")
                set_once(reg.credits, key, integer(f.value, "a credit value"), f, "credits");
            else if (fn == "l")
                set_once(reg.lower, key, integer(f.value, "a lower bound"), f, "lower bound");
            else if (fn == "u")
                set_once(reg.upper, key, integer(f.value, "an upper bound"), f, "upper bound");
            else if (fn == "s") {
                const string & code = symbol(f.value, "a turnus (w, s or e)");
                Turnus t;
                if (code == "w")
                    t = Turnus::winter;
                else if (code == "s")
                    t = Turnus::summer;
                else if (code == "e")
                    t = Turnus::every;
                else
                    fail_at(f.value, "turnus must be w, s or e");
                set_once(reg.turnus, key, t, f, "turnus");
            }
            else if (fn == "ep" || fn == "es") {
                auto & target = fn == "ep" ? exam.primary_options : exam.secondary_options;
                set_once(target, key, family_literal(f.value), f, "examination options");
                has_exam = true;
            }
            else
                set_once(reg.functions[fn], key, integer(f.value, "an integer value"), f, "value");
        }

        for (const auto & f : file.facts) {
            if (f.kind != Fact::Kind::constraint)
                continue;
            Resolver{reg, f}.check(f.constraint);
            switch (f.section) {
            case Section::global: reg.global_constraints.push_back(f.constraint); break;
            case Section::temporal: reg.temporal_constraints.push_back(f.constraint); break;
            case Section::exam_global:
                exam.global_constraints.push_back(f.constraint);
                has_exam = true;
                break;
            case Section::exam_temporal:
                exam.temporal_constraints.push_back(f.constraint);
                has_exam = true;
                break;
            }
        }

        if (has_exam)
            out.exam = std::move(exam);
        return out;
    }

    auto parse_instance(string_view text) -> Instance { return assemble(parse_facts(text)); }
}

namespace regula
{
    ParseError::ParseError(const std::string & message, std::size_t line, std::size_t column) :
        Error(line ? message + " at line " + std::to_string(line) + ", column " + std::to_string(column) : message),
        _message(message),
        _line(line),
        _column(column)
    {
    }
}
