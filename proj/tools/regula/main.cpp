#include <regula/dsl.hpp>
#include <regula/semantics.hpp>
#include <regula/service.hpp>
#include <regula/solver.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace
{
    using namespace regula;

    constexpr int exit_usage = 2;

    struct UsageError : Error
    {
        using Error::Error;
    };

    auto slurp(const std::string & path) -> std::string
    {
        std::ifstream in(path, std::ios::binary);
        if (! in)
            throw UsageError("cannot read " + path);
        std::ostringstream out;
        out << in.rdbuf();
        return out.str();
    }

    auto load_instance(const std::vector<std::string> & paths) -> dsl::Instance
    {
        dsl::FactFile all;
        for (const auto & path : paths) {
            try {
                auto facts = dsl::parse_facts(slurp(path));
                all.facts.insert(all.facts.end(), facts.facts.begin(), facts.facts.end());
            }
            catch (const ParseError & e) {
                throw UsageError(path + ": " + e.what());
            }
        }
        auto instance = dsl::assemble(all);
        auto report = check_wellformed(instance.regulation, instance.exam ? &*instance.exam : nullptr);
        if (! report.admissible())
            throw UsageError("instance is not well-formed\n" + to_string(report));
        return instance;
    }

    auto parse_cell(const std::string & text, Polarity polarity) -> Assumption
    {
        auto at = text.rfind('@');
        if (at == std::string::npos || at == 0 || at + 1 == text.size())
            throw UsageError("expected MODULE@SEMESTER, got '" + text + "'");
        try {
            std::size_t used = 0;
            int semester = std::stoi(text.substr(at + 1), &used);
            if (used != text.size() - at - 1)
                throw std::invalid_argument(text);
            return Assumption{text.substr(0, at), semester, polarity};
        }
        catch (const std::logic_error &) {
            throw UsageError("expected MODULE@SEMESTER, got '" + text + "'");
        }
    }

    struct Flags
    {
        std::vector<std::string> instances;
        int horizon = 0;
        std::size_t models = 1;
        std::vector<std::string> assume;
        std::vector<std::string> exclude;
        std::string plan;
        std::string exam_plan;
        std::string mode = "study";
        int port = 8080;
        std::string host = "127.0.0.1";
        std::string snapshots;
        std::uint64_t seed = 0;
        std::uint64_t node_budget = 0;
        std::string format = "pairs";
        std::string induce_format = "plan";
    };

    auto request_of(const Flags & f, const dsl::Instance & instance) -> solver::SolveRequest
    {
        solver::SolveRequest r;
        r.regulation = instance.regulation;
        r.exam = instance.exam;
        r.horizon = f.horizon;
        r.mode = f.mode == "exam" ? solver::Mode::exam : solver::Mode::study;
        r.seed = f.seed;
        r.node_budget = f.node_budget;
        r.model_limit = f.models;
        for (const auto & a : f.assume)
            r.assumptions.push_back(parse_cell(a, Polarity::assigned));
        for (const auto & a : f.exclude)
            r.assumptions.push_back(parse_cell(a, Polarity::excluded));
        return r;
    }

    auto as_rows(const ExamPlan & e) -> StudyPlan { return StudyPlan{e.semesters}; }

    auto run_solve(const Flags & f) -> int
    {
        auto instance = load_instance(f.instances);
        auto request = request_of(f, instance);
        auto result = solver::solve(request);
        bool first = true;
        for (const auto & s : result.solutions) {
            if (f.format == "plan") {
                if (! first)
                    std::cout << '\n';
                if (s.exam_plan)
                    std::cout << "% examination plan\n" << dsl::serialize(*s.exam_plan) << "% induced study plan\n";
                std::cout << dsl::serialize(s.plan);
            }
            else {
                std::cout << dsl::format_pairs(s.exam_plan ? as_rows(*s.exam_plan) : s.plan) << '\n';
            }
            first = false;
        }
        if (result.unknown()) {
            std::cerr << "UNKNOWN: node budget exhausted after " << result.nodes << " nodes\n";
            return result.solutions.empty() ? 3 : 0;
        }
        if (result.solutions.empty()) {
            std::cout << "UNSATISFIABLE\n";
            return 1;
        }
        return 0;
    }

    auto run_validate(const Flags & f) -> int
    {
        auto instance = load_instance(f.instances);
        ValidationReport report;
        if (! f.exam_plan.empty()) {
            if (! instance.exam)
                throw UsageError("the instance has no examination facts");
            auto eplan = dsl::parse_exam_plan(slurp(f.exam_plan), &*instance.exam);
            report = semantics::validate_exam_plan(instance.regulation, *instance.exam, eplan);
        }
        else if (! f.plan.empty()) {
            auto plan = dsl::parse_study_plan(slurp(f.plan), &instance.regulation);
            report = semantics::validate_study_plan(instance.regulation, plan);
        }
        std::cout << to_string(report);
        return report.admissible() ? 0 : 1;
    }

    auto join(const IdSet & s) -> std::string
    {
        std::string out;
        for (const auto & m : s)
            out += (out.empty() ? "" : " ") + m;
        return out;
    }

    auto run_consequences(const Flags & f) -> int
    {
        auto instance = load_instance(f.instances);
        auto request = request_of(f, instance);
        auto report = solver::consequences(request);
        std::cout << "satisfiable: " << (report.satisfiable ? "yes" : report.complete ? "no" : "unknown") << '\n';
        for (std::size_t i = 0; i < report.semesters.size(); ++i) {
            const auto & s = report.semesters[i];
            std::cout << "semester " << i + 1 << '\n';
            std::cout << "  forced:   " << join(s.forced) << '\n';
            std::cout << "  possible: " << join(s.possible) << '\n';
            if (! s.unknown.empty())
                std::cout << "  unknown:  " << join(s.unknown) << '\n';
        }
        if (! report.complete)
            std::cerr << "incomplete: node budget exhausted for some cells\n";
        return report.satisfiable ? 0 : 1;
    }

    auto run_induce(const Flags & f) -> int
    {
        auto instance = load_instance(f.instances);
        if (! instance.exam)
            throw UsageError("the instance has no examination facts");
        auto eplan = dsl::parse_exam_plan(slurp(f.exam_plan), &*instance.exam);
        auto plan = semantics::induce(eplan, *instance.exam, instance.regulation.modules);
        std::cout << (f.induce_format == "pairs" ? dsl::format_pairs(plan) + "\n" : dsl::serialize(plan));
        return 0;
    }

    service::Server * running = nullptr;

    auto run_serve(const Flags & f) -> int
    {
        service::Options options;
        if (! f.snapshots.empty())
            options.snapshot_dir = f.snapshots;
        options.node_budget = f.node_budget;
        service::SessionStore store(options);

        if (! f.instances.empty()) {
            service::json sources = service::json::array();
            for (const auto & path : f.instances)
                sources.push_back(slurp(path));
            auto state = store.create({{"instance", sources}, {"horizon", f.horizon}, {"mode", f.mode}});
            std::cout << "session " << state.at("id").get<std::string>() << '\n';
        }

        service::Server server(store);
        int port = server.bind(f.host, f.port);
        std::cout << "listening on http://" << f.host << ':' << port << std::endl;
        running = &server;
        std::signal(SIGINT, [](int) { running->stop(); });
        std::signal(SIGTERM, [](int) { running->stop(); });
        server.listen();
        running = nullptr;
        return 0;
    }
}

auto main(int argc, char ** argv) -> int
{
    CLI::App app{"Study regulation reasoning: solve, validate and explore study and examination plans."};
    app.require_subcommand(1);
    Flags f;

    auto instance = [&](CLI::App * cmd, bool required) {
        auto * opt = cmd->add_option("-i,--instance", f.instances, "Regulation file; repeat to concatenate facts")
                         ->check(CLI::ExistingFile);
        if (required)
            opt->required();
    };
    auto horizon = [&](CLI::App * cmd) {
        cmd->add_option("-n", f.horizon, "Number of semesters")->required()->check(CLI::Range(1, solver::max_horizon));
    };
    auto search = [&](CLI::App * cmd) {
        cmd->add_option("--assume", f.assume, "Require MODULE@SEM");
        cmd->add_option("--exclude", f.exclude, "Forbid MODULE@SEM");
        cmd->add_option("--mode", f.mode, "Decide modules (study) or examination tasks (exam)")
            ->check(CLI::IsMember({"study", "exam"}));
        cmd->add_option("--seed", f.seed, "Permute the value order; 0 keeps the canonical order");
        cmd->add_option("--node-budget", f.node_budget, "Search nodes allowed per query; 0 is unlimited");
    };

    auto * solve = app.add_subcommand("solve", "Enumerate admissible plans");
    instance(solve, true);
    horizon(solve);
    search(solve);
    solve->add_option("--models", f.models, "Plans to print; 0 prints all")->capture_default_str();
    solve->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"pairs", "plan"}));

    auto * validate = app.add_subcommand("validate", "Check a plan, or the instance alone");
    instance(validate, true);
    auto * p = validate->add_option("-p,--plan", f.plan, "Study plan file")->check(CLI::ExistingFile);
    validate->add_option("-e,--exam-plan", f.exam_plan, "Examination plan file")->check(CLI::ExistingFile)->excludes(p);

    auto * cons = app.add_subcommand("consequences", "Forced and possible modules per semester");
    instance(cons, true);
    horizon(cons);
    search(cons);

    auto * induce = app.add_subcommand("induce", "Study plan completed by an examination plan");
    instance(induce, true);
    induce->add_option("-e,--exam-plan", f.exam_plan, "Examination plan file")->required()->check(CLI::ExistingFile);
    induce->add_option("--format", f.induce_format, "Output format")
        ->check(CLI::IsMember({"pairs", "plan"}))
        ->capture_default_str();

    auto * serve = app.add_subcommand("serve", "Run the HTTP session service");
    instance(serve, false);
    serve->add_option("-n", f.horizon, "Horizon of the seeded session")->check(CLI::Range(1, solver::max_horizon));
    serve->add_option("--mode", f.mode, "Mode of the seeded session")->check(CLI::IsMember({"study", "exam"}));
    serve->add_option("--port", f.port, "Port; 0 picks a free one")->capture_default_str();
    serve->add_option("--host", f.host, "Address to bind")->capture_default_str();
    serve->add_option("--snapshots", f.snapshots, "Directory for session snapshots");
    serve->add_option("--node-budget", f.node_budget, "Search nodes allowed per query; 0 is unlimited");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError & e) {
        int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (*serve && ! f.instances.empty() && f.horizon == 0)
            throw UsageError("-n is required when serve seeds a session with -i");
        if (*solve)
            return run_solve(f);
        if (*validate)
            return run_validate(f);
        if (*cons)
            return run_consequences(f);
        if (*induce)
            return run_induce(f);
        return run_serve(f);
    }
    catch (const service::ServiceError & e) {
        std::cerr << "error: " << e.body().dump() << '\n';
        return exit_usage;
    }
    catch (const Error & e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
}
