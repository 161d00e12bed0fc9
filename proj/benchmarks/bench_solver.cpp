#include <regula/dsl.hpp>
#include <regula/semantics.hpp>
#include <regula/solver.hpp>

#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace regula;

namespace
{
    auto read(const std::string & name) -> std::string
    {
        std::ifstream in(std::filesystem::path(REGULA_DATA_DIR) / name);
        std::ostringstream out;
        out << in.rdbuf();
        return out.str();
    }

    auto request(const std::vector<std::string> & files, int horizon, solver::Mode mode = solver::Mode::study)
        -> solver::SolveRequest
    {
        std::string text;
        for (const auto & f : files)
            text += read(f) + "\n";
        auto inst = dsl::parse_instance(text);
        solver::SolveRequest r;
        r.regulation = inst.regulation;
        r.exam = inst.exam;
        r.horizon = horizon;
        r.mode = mode;
        return r;
    }

    void parse_cogsys(benchmark::State & state)
    {
        const std::string text = read("cogsys.reg") + "\n" + read("cogsys_exams.reg");
        for (auto _ : state)
            benchmark::DoNotOptimize(dsl::parse_instance(text));
    }

    void serialize_cogsys(benchmark::State & state)
    {
        const auto inst = dsl::parse_instance(read("cogsys.reg") + "\n" + read("cogsys_exams.reg"));
        for (auto _ : state)
            benchmark::DoNotOptimize(dsl::serialize(inst));
    }

    void validate_plan(benchmark::State & state)
    {
        const auto req = request({"cogsys.reg"}, 4);
        const auto plan = dsl::parse_study_plan(read("plan_example.plan"), &req.regulation);
        for (auto _ : state)
            benchmark::DoNotOptimize(semantics::validate_study_plan(req.regulation, plan));
    }

    // First plan, or the first `range(0)` plans.
    void solve_prefix(benchmark::State & state)
    {
        auto req = request({"cogsys.reg"}, 4);
        req.model_limit = static_cast<std::size_t>(state.range(0));
        for (auto _ : state)
            benchmark::DoNotOptimize(solver::solve(req));
        state.SetItemsProcessed(state.iterations() * state.range(0));
    }

    void solve_all(benchmark::State & state)
    {
        const auto req = request({"cogsys.reg"}, 4);
        std::size_t plans = 0;
        for (auto _ : state) {
            auto result = solver::solve(req);
            plans = result.solutions.size();
            benchmark::DoNotOptimize(result);
        }
        state.counters["plans"] = static_cast<double>(plans);
    }

    void stream_all(benchmark::State & state)
    {
        const auto req = request({"cogsys.reg"}, 4);
        for (auto _ : state) {
            solver::SolveSession session(req);
            std::size_t n = 0;
            while (session.next())
                ++n;
            benchmark::DoNotOptimize(n);
        }
    }

    void consequences_study(benchmark::State & state)
    {
        const auto req = request({"cogsys.reg"}, 4);
        for (auto _ : state)
            benchmark::DoNotOptimize(solver::consequences(req));
    }

    void consequences_assumed(benchmark::State & state)
    {
        auto req = request({"cogsys.reg"}, 4);
        req.assumptions = {{"bm3", 3, Polarity::assigned}};
        for (auto _ : state)
            benchmark::DoNotOptimize(solver::consequences(req));
    }

    void solve_exam_first(benchmark::State & state)
    {
        auto req = request({"cogsys.reg", "cogsys_exams.reg"}, 4, solver::Mode::exam);
        req.model_limit = 1;
        for (auto _ : state)
            benchmark::DoNotOptimize(solver::solve(req));
    }

    void consequences_exam(benchmark::State & state)
    {
        const auto req = request({"cogsys.reg", "cogsys_exams.reg"}, 4, solver::Mode::exam);
        for (auto _ : state)
            benchmark::DoNotOptimize(solver::consequences(req));
    }

    void oracle_toy(benchmark::State & state)
    {
        const auto req = request({"toy.reg"}, static_cast<int>(state.range(0)));
        for (auto _ : state)
            benchmark::DoNotOptimize(solver::brute_force_oracle(req));
    }
}

BENCHMARK(parse_cogsys)->Unit(benchmark::kMicrosecond);
BENCHMARK(serialize_cogsys)->Unit(benchmark::kMicrosecond);
BENCHMARK(validate_plan)->Unit(benchmark::kMicrosecond);
BENCHMARK(solve_prefix)->Arg(1)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(solve_all)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK(stream_all)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK(consequences_study)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK(consequences_assumed)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK(solve_exam_first)->Unit(benchmark::kMillisecond);
BENCHMARK(consequences_exam)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK(oracle_toy)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
