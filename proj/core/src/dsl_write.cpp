#include <regula/dsl.hpp>

#include <cctype>
#include <charconv>
#include <sstream>

using std::string;
using std::string_view;

namespace regula::dsl
{
    using regula::to_string;
}

namespace regula::dsl
{
    namespace
    {
        auto pooled(const IdSet & elements) -> string
        {
            if (elements.size() == 1)
                return *elements.begin();
            string out = "(";
            bool first = true;
            for (const auto & e : elements) {
                if (! first)
                    out += ';';
                out += e;
                first = false;
            }
            return out + ")";
        }

        void write_section(std::ostringstream & out, const char * name, const std::vector<ConstraintExpr> & cs)
        {
            if (cs.empty())
                return;
            out << '#' << name << ".\n";
            for (const auto & c : cs)
                out << to_string(c) << ".\n";
        }
    }

    auto serialize(const Regulation & reg, const ExamSpec * exam) -> string
    {
        std::ostringstream out;
        if (! reg.modules.empty())
            out << "in(" << pooled(reg.modules) << "," << reserved::modules << ").\n";
        if (! reg.groups.empty())
            out << "in(" << pooled(reg.groups) << "," << reserved::groups << ").\n";
        for (const auto & [name, members] : reg.sets)
            if (! members.empty())
                out << "in(" << pooled(members) << "," << name << ").\n";

        for (const auto & [m, c] : reg.credits)
            out << "map(c," << m << "," << c << ").\n";
        for (const auto & [m, t] : reg.turnus)
            out << "map(s," << m << "," << turnus_code(t) << ").\n";
        for (const auto & [g, v] : reg.lower)
            out << "map(l," << g << "," << v << ").\n";
        for (const auto & [g, v] : reg.upper)
            out << "map(u," << g << "," << v << ").\n";
        for (const auto & [f, entries] : reg.functions)
            for (const auto & [e, v] : entries)
                out << "map(" << f << "," << e << "," << v << ").\n";

        if (exam) {
            if (! exam->primary_tasks.empty())
                out << "in(" << pooled(exam->primary_tasks) << "," << reserved::primary_tasks << ").\n";
            if (! exam->secondary_tasks.empty())
                out << "in(" << pooled(exam->secondary_tasks) << "," << reserved::secondary_tasks << ").\n";
            for (const auto & [m, fam] : exam->primary_options)
                out << "map(ep," << m << "," << to_string(fam) << ").\n";
            for (const auto & [m, fam] : exam->secondary_options)
                out << "map(es," << m << "," << to_string(fam) << ").\n";
            for (const auto & dep : exam->dependencies)
                out << "in((" << to_string(dep.secondary_options) << "," << to_string(dep.primary) << "),"
                    << reserved::dependencies << ").\n";
        }

        write_section(out, "global", reg.global_constraints);
        write_section(out, "temporal", reg.temporal_constraints);
        if (exam) {
            write_section(out, "exam_global", exam->global_constraints);
            write_section(out, "exam_temporal", exam->temporal_constraints);
        }
        return out.str();
    }

    auto serialize(const Instance & instance) -> string
    {
        return serialize(instance.regulation, instance.exam ? &*instance.exam : nullptr);
    }

    namespace
    {
        auto read_plan(string_view text, const char * kind, auto && known) -> std::vector<IdSet>
        {
            std::vector<IdSet> semesters;
            std::size_t line_no = 0;
            std::size_t pos = 0;

            while (pos <= text.size()) {
                auto end = text.find('\n', pos);
                if (end == string_view::npos)
                    end = text.size();
                string_view line = text.substr(pos, end - pos);
                pos = end + 1;
                ++line_no;

                if (auto c = line.find('%'); c != string_view::npos)
                    line = line.substr(0, c);
                std::size_t i = 0;
                auto skip = [&] {
                    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
                        ++i;
                };
                skip();
                if (i == line.size())
                    continue;

                std::size_t start = i;
                while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i])))
                    ++i;
                int index = 0;
                if (start == i || std::from_chars(line.data() + start, line.data() + i, index).ec != std::errc{})
                    throw ParseError("expected a semester number", line_no, start + 1);
                skip();
                if (i == line.size() || line[i] != ':')
                    throw ParseError("expected ':' after semester number", line_no, i + 1);
                ++i;
                if (index != static_cast<int>(semesters.size()) + 1)
                    throw ParseError("semester " + std::to_string(index) + " out of order (expected "
                            + std::to_string(semesters.size() + 1) + ")",
                        line_no, start + 1);

                IdSet ids;
                while (true) {
                    skip();
                    if (i == line.size())
                        break;
                    std::size_t id_start = i;
                    while (i < line.size() && ! std::isspace(static_cast<unsigned char>(line[i])))
                        ++i;
                    string id(line.substr(id_start, i - id_start));
                    for (char ch : id)
                        if (! std::isalnum(static_cast<unsigned char>(ch)) && ch != '_')
                            throw ParseError("malformed identifier '" + id + "'", line_no, id_start + 1);
                    if (! known(id))
                        throw ParseError(string("unknown ") + kind + " '" + id + "'", line_no, id_start + 1);
                    ids.insert(std::move(id));
                }
                semesters.push_back(std::move(ids));
            }

            if (semesters.empty())
                throw ParseError("plan has no semesters", 0, 0);
            return semesters;
        }

        auto write_plan(const std::vector<IdSet> & semesters) -> string
        {
            std::ostringstream out;
            for (std::size_t i = 0; i < semesters.size(); ++i) {
                out << i + 1 << ':';
                for (const auto & id : semesters[i])
                    out << ' ' << id;
                out << '\n';
            }
            return out.str();
        }
    }

    auto parse_study_plan(string_view text, const Regulation * reg) -> StudyPlan
    {
        return StudyPlan{read_plan(text, "module", [&](const string & id) { return ! reg || reg->modules.contains(id); })};
    }

    auto parse_exam_plan(string_view text, const ExamSpec * exam) -> ExamPlan
    {
        return ExamPlan{read_plan(text, "examination task", [&](const string & id) { return ! exam || exam->kind_of(id); })};
    }

    auto serialize(const StudyPlan & plan) -> string { return write_plan(plan.semesters); }
    auto serialize(const ExamPlan & plan) -> string { return write_plan(plan.semesters); }

    auto format_pairs(const StudyPlan & plan) -> string
    {
        string out;
        for (std::size_t i = 0; i < plan.semesters.size(); ++i)
            for (const auto & m : plan.semesters[i]) {
                if (! out.empty())
                    out += ' ';
                out += "(" + m + "," + std::to_string(i + 1) + ")";
            }
        return out;
    }
}
