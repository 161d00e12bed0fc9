#include "support.hpp"

#include <regula/dsl.hpp>
#include <regula/semantics.hpp>
#include <regula/service.hpp>

#include <doctest.h>
#include <httplib.h>

#include <algorithm>
#include <filesystem>
#include <thread>

using namespace regula;
using service::json;

namespace
{
    auto text(const std::string & name) -> std::string { return testing::read_file(testing::data_dir() / name); }

    auto body(const std::string & instance, int horizon) -> json { return {{"instance", instance}, {"horizon", horizon}}; }

    auto ids(const json & list) -> IdSet
    {
        IdSet out;
        for (const auto & x : list)
            out.insert(x.get<std::string>());
        return out;
    }

    auto cell(const json & state, int semester, const char * field) -> IdSet
    {
        return ids(state.at("semesters").at(semester - 1).at(field));
    }

    // Status of a refused store call; 0 when it succeeded.
    template <typename F>
    auto status_of(F f) -> int
    {
        try {
            f();
        }
        catch (const service::ServiceError & e) {
            return e.status();
        }
        return 0;
    }

    auto plan_of(const json & state) -> StudyPlan
    {
        StudyPlan p;
        for (const auto & s : state.at("current_plan").at("semesters"))
            p.semesters.push_back(ids(s));
        return p;
    }

    void check_invariants(const json & state)
    {
        for (const auto & s : state.at("semesters")) {
            const IdSet forced = ids(s.at("forced"));
            const IdSet possible = ids(s.at("possible"));
            IdSet options;
            std::set_difference(possible.begin(), possible.end(), forced.begin(), forced.end(),
                std::inserter(options, options.end()));
            CHECK(std::includes(possible.begin(), possible.end(), forced.begin(), forced.end()));
            CHECK(ids(s.at("options")) == options);
        }
        CHECK(state.at("browsing").get<bool>() == ! state.at("current_plan").is_null());
    }
}

TEST_SUITE("service")
{
    TEST_CASE("create on cogsys")
    {
        service::SessionStore store;
        json state = store.create(body(text("cogsys.reg"), 4));
        check_invariants(state);
        CHECK(state.at("satisfiable").get<bool>());
        CHECK(state.at("complete").get<bool>());
        CHECK(! state.at("browsing").get<bool>());
        CHECK(cell(state, 4, "possible").contains("msc"));
        CHECK(! cell(state, 3, "options").contains("bm2"));
        CHECK(! cell(state, 1, "options").contains("bm2"));
        CHECK(cell(state, 2, "forced") == IdSet{"bm2"});
        const json & assigned = state.at("semesters").at(1).at("assigned");
        REQUIRE(assigned.size() == 1);
        CHECK(assigned[0] == json{{"module", "bm2"}, {"source", "inferred"}, {"credits", 9}});
        CHECK(store.get(state.at("id")) == state);
    }

    TEST_CASE("create on the toy instance")
    {
        service::SessionStore store;
        json state = store.create(body(text("toy.reg"), 2));
        check_invariants(state);
        CHECK(cell(state, 1, "forced").contains("b"));
        CHECK(cell(state, 1, "options") == IdSet{"a"});
    }

    TEST_CASE("create rejects malformed requests")
    {
        service::SessionStore store;
        try {
            (void) store.create(body("in((a;b),m).\nmap(c,a 5).\n", 2));
            FAIL("accepted a malformed instance");
        }
        catch (const service::ServiceError & e) {
            CHECK(e.status() == 400);
            CHECK(e.body().at("line") == 2);
            CHECK(e.body().at("column").is_number_integer());
        }
        CHECK(status_of([&] { (void) store.create(json{{"horizon", 2}}); }) == 400);
        CHECK(status_of([&] { (void) store.create(body(text("toy.reg"), 0)); }) == 400);
        CHECK(status_of([&] { (void) store.create(json{{"instance", text("toy.reg")}, {"horizon", "2"}}); }) == 400);
        CHECK(status_of([&] {
            (void) store.create(json{{"instance", text("toy.reg")}, {"horizon", 2}, {"mode", "exam"}});
        }) == 400);
        CHECK(store.size() == 0);
    }

    TEST_CASE("assumptions on cogsys")
    {
        service::SessionStore store;
        const json initial = store.create(body(text("cogsys.reg"), 4));
        const std::string id = initial.at("id");

        CHECK(status_of([&] { (void) store.add_assumption(id, {{"module", "bm2"}, {"semester", 3}}); }) == 422);
        CHECK(status_of([&] { (void) store.add_assumption(id, {{"module", "zz"}, {"semester", 3}}); }) == 422);
        CHECK(status_of([&] { (void) store.add_assumption(id, {{"module", "bm3"}, {"semester", 5}}); }) == 422);
        CHECK(status_of([&] { (void) store.add_assumption(id, {{"semester", 3}}); }) == 400);
        CHECK(status_of([&] { (void) store.add_assumption("nope", {{"module", "bm3"}, {"semester", 3}}); }) == 404);
        CHECK(store.get(id) == initial);

        json after = store.add_assumption(id, {{"module", "bm3"}, {"semester", 3}});
        check_invariants(after);
        CHECK(cell(after, 3, "forced").contains("bm3"));
        CHECK(! cell(after, 3, "options").contains("bm3"));
        CHECK(! cell(after, 1, "possible").contains("bm3"));
        CHECK(after.at("assumptions") == json::array({{{"module", "bm3"}, {"semester", 3}, {"polarity", "assigned"}}}));
        const json & assigned = after.at("semesters").at(2).at("assigned");
        CHECK(std::count(assigned.begin(), assigned.end(), json{{"module", "bm3"}, {"source", "user"}, {"credits", 9}}) == 1);
        CHECK(store.get(id) == after);
        CHECK(status_of([&] { (void) store.add_assumption(id, {{"module", "bm3"}, {"semester", 3}}); }) == 422);

        CHECK(status_of([&] { (void) store.remove_assumption(id, "bm2", 2); }) == 422);
        json restored = store.remove_assumption(id, "bm3", 3);
        CHECK(restored == initial);
        CHECK(status_of([&] { (void) store.remove_assumption(id, "bm3", 3); }) == 422);
        CHECK(status_of([&] { (void) store.remove_assumption("nope", "bm3", 3); }) == 404);
    }

    TEST_CASE("next browses complete plans under the assumptions")
    {
        service::SessionStore store;
        const std::string id = store.create(body(text("cogsys.reg"), 4)).at("id");
        (void) store.add_assumption(id, {{"module", "bm3"}, {"semester", 3}});
        json state = store.next(id);
        check_invariants(state);
        CHECK(state.at("browsing").get<bool>());
        const StudyPlan plan = plan_of(state);
        CHECK(plan.semesters.at(2).contains("bm3"));
        CHECK(semantics::validate_study_plan(testing::cogsys().regulation, plan).admissible());
        CHECK(state.at("current_plan").at("pairs") == dsl::format_pairs(plan));
        for (int i = 1; i <= 4; ++i) {
            IdSet shown;
            for (const auto & a : state.at("semesters").at(i - 1).at("assigned"))
                shown.insert(a.at("module").get<std::string>());
            CHECK(shown == plan.semesters[i - 1]);
        }
        CHECK(plan_of(store.next(id)) != plan);

        // A new assumption leaves browsing.
        json added = store.add_assumption(id, {{"module", "im"}, {"semester", 1}});
        CHECK(! added.at("browsing").get<bool>());
        CHECK(added.at("current_plan").is_null());
    }

    TEST_CASE("next follows the oracle order on the toy instance and wraps")
    {
        auto expected = solver::brute_force_oracle(testing::request(testing::toy(), 2));
        REQUIRE(expected.size() == 2);
        service::SessionStore store;
        const std::string id = store.create(body(text("toy.reg"), 2)).at("id");
        CHECK(plan_of(store.next(id)) == expected[0].plan);
        CHECK(plan_of(store.next(id)) == expected[1].plan);
        CHECK(plan_of(store.next(id)) == expected[0].plan);
        json reset = store.reset(id);
        CHECK(! reset.at("browsing").get<bool>());
        CHECK(plan_of(store.next(id)) == expected[0].plan);
    }

    TEST_CASE("unsatisfiable assumptions and sessions answer 409")
    {
        service::SessionStore store;
        const json initial = store.create(body(text("toy.reg"), 2));
        const std::string id = initial.at("id");
        CHECK(status_of([&] {
            (void) store.add_assumption(id, {{"module", "b"}, {"semester", 1}, {"polarity", "excluded"}});
        }) == 409);
        CHECK(store.get(id) == initial);

        const std::string broken = text("toy.reg") + "\nsum(int(s,m),c,geq,11).\n";
        json state = store.create(body(broken, 2));
        CHECK(! state.at("satisfiable").get<bool>());
        check_invariants(state);
        CHECK(status_of([&] { (void) store.next(state.at("id")); }) == 409);
    }

    TEST_CASE("add and remove pairs return to the initial report")
    {
        service::SessionStore store;
        const json initial = store.create(body(text("cogsys.reg"), 4));
        const std::string id = initial.at("id");
        const std::vector<std::pair<std::string, int>> picks{{"am11", 1}, {"im", 3}, {"pm2", 2}};
        for (const auto & [m, i] : picks)
            (void) store.add_assumption(id, {{"module", m}, {"semester", i}});
        for (auto it = picks.rbegin(); it != picks.rend(); ++it)
            (void) store.remove_assumption(id, it->first, it->second);
        CHECK(store.get(id) == initial);
    }

    TEST_CASE("snapshots restore sessions")
    {
        const auto dir = std::filesystem::temp_directory_path() / "regula_service_snapshots";
        std::filesystem::remove_all(dir);
        json last;
        {
            service::SessionStore store({.snapshot_dir = dir});
            const std::string id = store.create(body(text("toy.reg"), 2)).at("id");
            (void) store.next(id);
            last = store.next(id);
        }
        service::SessionStore reopened({.snapshot_dir = dir});
        CHECK(reopened.size() == 1);
        CHECK(reopened.get(last.at("id")) == last);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("node budgets mark unknown cells")
    {
        service::SessionStore store;
        json state = store.create(json{{"instance", text("cogsys.reg")}, {"horizon", 4}, {"node_budget", 3}});
        CHECK(! state.at("complete").get<bool>());
        bool some = false;
        for (const auto & s : state.at("semesters"))
            some |= ! s.at("unknown").empty();
        CHECK(some);
    }

    TEST_CASE("exam sessions")
    {
        service::SessionStore store;
        json state = store.create(
            json{{"instance", json::array({text("cogsys.reg"), text("cogsys_exams.reg")})}, {"horizon", 4}, {"mode", "exam"}});
        check_invariants(state);
        CHECK(state.at("mode") == "exam");
        CHECK(state.at("satisfiable").get<bool>());
        CHECK(state.at("complete").get<bool>());
        CHECK(cell(state, 4, "possible") == IdSet{"msc"});
        CHECK(cell(state, 2, "forced") == IdSet{"bm2"});
        json browsed = store.next(state.at("id"));
        CHECK(browsed.at("current_plan").contains("exam_semesters"));
    }

    TEST_CASE("http endpoints")
    {
        service::SessionStore store;
        service::Server server(store);
        const int port = server.bind("127.0.0.1", 0);
        REQUIRE(port > 0);
        std::thread thread([&] { server.listen(); });

        httplib::Client client("127.0.0.1", port);
        auto created = client.Post("/sessions", body(text("toy.reg"), 2).dump(), "application/json");
        REQUIRE(created);
        CHECK(created->status == 201);
        CHECK(created->get_header_value("Access-Control-Allow-Origin") == "*");
        json state = json::parse(created->body);
        const std::string id = state.at("id");

        auto got = client.Get("/sessions/" + id);
        REQUIRE(got);
        CHECK(got->status == 200);
        CHECK(json::parse(got->body) == state);

        auto preflight = client.Options("/sessions/" + id + "/assumptions");
        REQUIRE(preflight);
        CHECK(preflight->status == 204);
        CHECK(preflight->get_header_value("Access-Control-Allow-Methods").find("DELETE") != std::string::npos);

        auto assumed = client.Post("/sessions/" + id + "/assumptions", json{{"module", "a"}, {"semester", 2}}.dump(),
            "application/json");
        REQUIRE(assumed);
        CHECK(assumed->status == 200);
        CHECK(cell(json::parse(assumed->body), 2, "forced") == IdSet{"a"});

        auto refused = client.Post("/sessions/" + id + "/assumptions", json{{"module", "b"}, {"semester", 2}}.dump(),
            "application/json");
        REQUIRE(refused);
        CHECK(refused->status == 422);
        CHECK(json::parse(refused->body).contains("error"));

        auto next = client.Post("/sessions/" + id + "/next");
        REQUIRE(next);
        CHECK(next->status == 200);
        CHECK(plan_of(json::parse(next->body)) == StudyPlan{{{"b"}, {"a"}}});

        auto removed = client.Delete("/sessions/" + id + "/assumptions/a/2");
        REQUIRE(removed);
        CHECK(removed->status == 200);
        CHECK(json::parse(removed->body) == state);

        auto missing = client.Get("/sessions/unknown");
        REQUIRE(missing);
        CHECK(missing->status == 404);

        auto malformed = client.Post("/sessions", "{not json", "application/json");
        REQUIRE(malformed);
        CHECK(malformed->status == 400);

        auto reset = client.Post("/sessions/" + id + "/reset");
        REQUIRE(reset);
        CHECK(reset->status == 200);

        server.stop();
        thread.join();
    }
}
