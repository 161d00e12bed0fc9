#include "support.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace regula;

namespace
{
    struct Run
    {
        int code = -1;
        std::string out;
    };

    auto data(const std::string & name) -> std::string { return (testing::data_dir() / name).string(); }

    // Runs the CLI through the shell; `redirect` is appended verbatim.
    auto run(const std::string & args, const std::string & redirect = "2>/dev/null") -> Run
    {
        const std::string command = std::string(REGULA_CLI) + " " + args + " " + redirect;
        FILE * pipe = popen(command.c_str(), "r");
        REQUIRE(pipe);
        Run r;
        std::array<char, 4096> buf{};
        std::size_t n = 0;
        while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
            r.out.append(buf.data(), n);
        const int status = pclose(pipe);
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        return r;
    }

    auto lines(const std::string & text) -> std::vector<std::string>
    {
        std::vector<std::string> out;
        std::istringstream in(text);
        for (std::string line; std::getline(in, line);)
            out.push_back(line);
        return out;
    }

    auto tokens(const std::string & line) -> std::multiset<std::string>
    {
        std::multiset<std::string> out;
        std::istringstream in(line);
        for (std::string t; in >> t;)
            out.insert(t);
        return out;
    }

    auto scratch(const std::string & name, const std::string & content) -> std::string
    {
        const auto path = std::filesystem::temp_directory_path() / ("regula_cli_" + name);
        std::ofstream(path) << content;
        return path.string();
    }

    const std::string cogsys = "-i " + data("cogsys.reg");
    const std::string exams = cogsys + " -i " + data("cogsys_exams.reg");
    const std::string answer = "(bm1,1) (bm3,1) (fm1,1) (am12,1) (bm2,2) (am21,2) (pm1,2) (im,3) (am31,3) (pm3,3) (msc,4)";
}

TEST_SUITE("cli")
{
    TEST_CASE("solve enumerates the reference answer exactly once")
    {
        Run r = run("solve " + cogsys + " -n 4 --models 0");
        CHECK(r.code == 0);
        auto all = lines(r.out);
        CHECK(all.size() == 353760);
        CHECK(std::count_if(all.begin(), all.end(), [](const std::string & l) { return tokens(l) == tokens(answer); }) == 1);
        CHECK(std::find(all.begin(), all.end(), "(am12,1) (bm1,1) (bm3,1) (fm1,1) (am21,2) (bm2,2) (pm1,2) (am31,3) (im,3) (pm3,3) (msc,4)") !=
            all.end());
    }

    TEST_CASE("solve output is deterministic and validates")
    {
        Run a = run("solve " + cogsys + " -n 4 --models 25");
        Run b = run("solve " + cogsys + " -n 4 --models 25");
        CHECK(a.code == 0);
        CHECK(lines(a.out).size() == 25);
        CHECK(a.out == b.out);

        Run plan = run("solve " + cogsys + " -n 4 --models 1 --format plan");
        REQUIRE(plan.code == 0);
        const auto path = scratch("solved.plan", plan.out);
        Run v = run("validate " + cogsys + " -p " + path);
        CHECK(v.code == 0);
        CHECK(v.out == "admissible\n");

        Run seeded = run("solve " + cogsys + " -n 4 --models 1 --seed 7");
        CHECK(seeded.code == 0);
        CHECK(lines(seeded.out).size() == 1);
    }

    TEST_CASE("solve with assumptions")
    {
        Run r = run("solve " + cogsys + " -n 4 --models 3 --assume bm3@3 --exclude im@3");
        CHECK(r.code == 0);
        for (const auto & l : lines(r.out)) {
            CHECK(l.find("(bm3,3)") != std::string::npos);
            CHECK(l.find("(im,3)") == std::string::npos);
        }
        Run u = run("solve " + cogsys + " -n 4 --assume msc@1");
        CHECK(u.code == 1);
        CHECK(u.out == "UNSATISFIABLE\n");
    }

    TEST_CASE("solve in exam mode prints task pairs")
    {
        Run r = run("solve " + exams + " -n 4 --mode exam --models 2");
        CHECK(r.code == 0);
        auto all = lines(r.out);
        REQUIRE(all.size() == 2);
        CHECK(all[0].find("(ep_msc,") != std::string::npos);
    }

    TEST_CASE("validate")
    {
        Run ok = run("validate " + cogsys + " -p " + data("plan_example.plan"));
        CHECK(ok.code == 0);
        CHECK(ok.out == "admissible\n");
        Run instance = run("validate " + cogsys);
        CHECK(instance.code == 0);
        Run exam_ok = run("validate " + exams + " -e " + data("exam_example.eplan"));
        CHECK(exam_ok.code == 0);
        Run exam_bad = run("validate " + exams + " -e " + data("exam_prime.eplan"));
        CHECK(exam_bad.code == 1);
        CHECK(exam_bad.out.starts_with("inadmissible\n"));
        CHECK(exam_bad.out.find("study temporal[0] empty(repeated)") != std::string::npos);
        CHECK(exam_bad.out.find("exam_global completion(bm1,primary)") != std::string::npos);
    }

    TEST_CASE("induce then validate")
    {
        Run good = run("induce " + exams + " -e " + data("exam_example.eplan"));
        CHECK(good.code == 0);
        CHECK(good.out == "1: am12 bm1 bm3 fm1\n2: am21 bm2 pm1\n3: am31 im pm3\n4: msc\n");

        Run pairs = run("induce " + exams + " -e " + data("exam_example.eplan") + " --format pairs");
        CHECK(tokens(pairs.out) == tokens(answer));

        Run prime = run("induce " + exams + " -e " + data("exam_prime.eplan"));
        REQUIRE(prime.code == 0);
        CHECK(lines(prime.out).at(1) == "2: am21 bm1 bm2 pm1");
        Run v = run("validate " + cogsys + " -p " + scratch("prime.plan", prime.out));
        CHECK(v.code == 1);
        CHECK(v.out.starts_with("inadmissible\n"));
    }

    TEST_CASE("consequences table")
    {
        Run r = run("consequences " + cogsys + " -n 4");
        CHECK(r.code == 0);
        auto all = lines(r.out);
        REQUIRE(all.size() == 13);
        CHECK(all[0] == "satisfiable: yes");
        CHECK(all[4] == "semester 2");
        CHECK(all[5] == "  forced:   bm2");
        CHECK(all[12] == "  possible: msc");
        CHECK(all[3].find("bm2") == std::string::npos);
        CHECK(all[9].find("bm2") == std::string::npos);

        Run u = run("consequences " + cogsys + " -n 4 --assume msc@1");
        CHECK(u.code == 1);
        CHECK(u.out.starts_with("satisfiable: no"));

        Run partial = run("consequences " + cogsys + " -n 4 --node-budget 3", "2>&1");
        CHECK(partial.out.find("unknown") != std::string::npos);
    }

    TEST_CASE("usage and parse errors exit 2")
    {
        CHECK(run("").code == 2);
        CHECK(run("solve " + cogsys).code == 2);
        CHECK(run("solve " + cogsys + " -n 0").code == 2);
        CHECK(run("solve -i /nonexistent.reg -n 2").code == 2);
        CHECK(run("solve " + cogsys + " -n 4 --mode other").code == 2);

        Run bad_assume = run("solve " + cogsys + " -n 4 --assume msc3", "2>&1");
        CHECK(bad_assume.code == 2);
        CHECK(bad_assume.out.find("MODULE@SEMESTER") != std::string::npos);

        Run unknown = run("solve " + cogsys + " -n 4 --assume zz@1", "2>&1");
        CHECK(unknown.code == 2);

        const auto bad = scratch("bad.reg", "in((a;b),m).\nmap(c,a 5).\n");
        Run parse = run("validate -i " + bad, "2>&1");
        CHECK(parse.code == 2);
        CHECK(parse.out.find("line 2, column 9") != std::string::npos);

        CHECK(run("induce " + cogsys + " -e " + data("exam_example.eplan")).code == 2);
        CHECK(run("solve " + cogsys + " -n 4 --mode exam").code == 2);
    }

    TEST_CASE("serve binds and stops on SIGTERM")
    {
        Run r = run("serve --port 0 -n 2 -i " + data("toy.reg"), "2>&1 & pid=$!; sleep 1; kill -TERM $pid; wait $pid");
        CHECK(r.out.find("session ") != std::string::npos);
        CHECK(r.out.find("listening on http://127.0.0.1:") != std::string::npos);
    }
}
