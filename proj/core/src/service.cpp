#include <regula/dsl.hpp>
#include <regula/service.hpp>
#include <regula/solver.hpp>

#include <httplib.h>

#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>

namespace regula::service
{
    ServiceError::ServiceError(int status, json body) :
        Error(body.value("error", std::string("request failed"))),
        _status(status),
        _body(std::move(body))
    {
    }

    namespace
    {
        auto fail(int status, const std::string & message) -> ServiceError { return {status, json{{"error", message}}}; }

        auto polarity_name(Polarity p) -> const char * { return p == Polarity::assigned ? "assigned" : "excluded"; }

        auto parse_polarity(const std::string & s) -> Polarity
        {
            if (s == "assigned")
                return Polarity::assigned;
            if (s == "excluded")
                return Polarity::excluded;
            throw fail(400, "polarity must be 'assigned' or 'excluded'");
        }

        auto load(const std::vector<std::string> & sources) -> dsl::Instance
        {
            dsl::FactFile all;
            for (std::size_t i = 0; i < sources.size(); ++i) {
                try {
                    auto facts = dsl::parse_facts(sources[i]);
                    all.facts.insert(all.facts.end(), facts.facts.begin(), facts.facts.end());
                }
                catch (const ParseError & e) {
                    throw ServiceError(400,
                        json{{"error", e.what()}, {"message", e.message()}, {"line", e.line()}, {"column", e.column()},
                            {"source", i}});
                }
            }
            dsl::Instance instance;
            try {
                instance = dsl::assemble(all);
            }
            catch (const ParseError & e) {
                throw ServiceError(
                    400, json{{"error", e.what()}, {"message", e.message()}, {"line", e.line()}, {"column", e.column()}});
            }
            auto report = check_wellformed(instance.regulation, instance.exam ? &*instance.exam : nullptr);
            if (! report.admissible()) {
                json violations = json::array();
                for (const auto & v : report.violations)
                    violations.push_back({{"constraint", v.constraint}, {"reason", v.reason}});
                throw ServiceError(400, json{{"error", "instance is not well-formed"}, {"violations", violations}});
            }
            return instance;
        }

        auto to_json(const std::vector<IdSet> & semesters) -> json
        {
            json out = json::array();
            for (const auto & s : semesters)
                out.push_back(json(std::vector<Id>(s.begin(), s.end())));
            return out;
        }
    }

    class Session
    {
    public:
        Session(std::string id, std::vector<std::string> sources, int horizon, solver::Mode mode, std::uint64_t budget) :
            id(std::move(id)),
            sources(std::move(sources)),
            instance(load(this->sources)),
            horizon(horizon),
            mode(mode),
            budget(budget)
        {
            if (horizon < 1 || horizon > solver::max_horizon)
                throw fail(400, "horizon must be between 1 and " + std::to_string(solver::max_horizon));
            if (mode == solver::Mode::exam && ! instance.exam)
                throw fail(400, "exam mode requires examination facts in the instance");
            recompute();
        }

        auto request(std::vector<Assumption> with) const -> solver::SolveRequest
        {
            solver::SolveRequest r;
            r.regulation = instance.regulation;
            r.exam = instance.exam;
            r.horizon = horizon;
            r.assumptions = std::move(with);
            r.mode = mode;
            r.node_budget = budget;
            return r;
        }

        void recompute() { report = solver::consequences(request(assumptions)); }

        void leave_browsing()
        {
            browsing = false;
            current.reset();
            browser.reset();
            browsed = 0;
        }

        void advance()
        {
            for (int attempt = 0; attempt < 2; ++attempt) {
                if (! browser)
                    browser = std::make_unique<solver::SolveSession>(request(assumptions));
                if (auto s = browser->next()) {
                    current = std::move(*s);
                    browsing = true;
                    ++browsed;
                    return;
                }
                if (browser->budget_exhausted())
                    throw fail(409, "node budget exhausted before a plan was found");
                browser.reset();
                browsed = 0;
            }
            throw fail(409, "no admissible plan under the current assumptions");
        }

        auto is_user(const Id & m, int semester) const -> bool
        {
            for (const auto & a : assumptions)
                if (a.module == m && a.semester == semester && a.polarity == Polarity::assigned)
                    return true;
            return false;
        }

        auto state() const -> json
        {
            const auto & reg = instance.regulation;
            json semesters = json::array();
            for (int i = 1; i <= horizon; ++i) {
                const auto & c = report.semesters[i - 1];
                IdSet options;
                for (const auto & m : c.possible)
                    if (! c.forced.contains(m))
                        options.insert(m);
                const IdSet & shown = browsing ? current->plan.semesters[i - 1] : c.forced;
                json assigned = json::array();
                for (const auto & m : shown) {
                    auto credits = reg.credits.find(m);
                    assigned.push_back({{"module", m}, {"source", is_user(m, i) ? "user" : "inferred"},
                        {"credits", credits == reg.credits.end() ? 0 : credits->second}});
                }
                semesters.push_back({{"index", i}, {"forced", std::vector<Id>(c.forced.begin(), c.forced.end())},
                    {"possible", std::vector<Id>(c.possible.begin(), c.possible.end())},
                    {"options", std::vector<Id>(options.begin(), options.end())},
                    {"unknown", std::vector<Id>(c.unknown.begin(), c.unknown.end())}, {"assigned", assigned}});
            }

            json list = json::array();
            for (const auto & a : assumptions)
                list.push_back({{"module", a.module}, {"semester", a.semester}, {"polarity", polarity_name(a.polarity)}});

            json plan = nullptr;
            if (browsing) {
                plan = {{"semesters", to_json(current->plan.semesters)}, {"pairs", dsl::format_pairs(current->plan)}};
                if (current->exam_plan)
                    plan["exam_semesters"] = to_json(current->exam_plan->semesters);
            }

            return {{"id", id}, {"horizon", horizon}, {"mode", mode == solver::Mode::exam ? "exam" : "study"},
                {"satisfiable", report.satisfiable}, {"complete", report.complete}, {"browsing", browsing},
                {"assumptions", list}, {"semesters", semesters}, {"current_plan", plan}};
        }

        auto snapshot() const -> json
        {
            json list = json::array();
            for (const auto & a : assumptions)
                list.push_back({{"module", a.module}, {"semester", a.semester}, {"polarity", polarity_name(a.polarity)}});
            return {{"id", id}, {"sources", sources}, {"horizon", horizon},
                {"mode", mode == solver::Mode::exam ? "exam" : "study"}, {"node_budget", budget}, {"assumptions", list},
                {"browsed", browse_index()}};
        }

        auto browse_index() const -> std::size_t { return browsing ? browsed : 0; }

        mutable std::shared_mutex mutex;
        const std::string id;
        const std::vector<std::string> sources;
        const dsl::Instance instance;
        const int horizon;
        const solver::Mode mode;
        const std::uint64_t budget;

        std::vector<Assumption> assumptions;
        ConsequenceReport report;
        bool browsing = false;
        std::optional<solver::Solution> current;
        std::unique_ptr<solver::SolveSession> browser;
        std::size_t browsed = 0;
    };

    namespace
    {
        auto read_sources(const json & body) -> std::vector<std::string>
        {
            if (! body.contains("instance"))
                throw fail(400, "missing field 'instance'");
            const auto & inst = body.at("instance");
            if (inst.is_string())
                return {inst.get<std::string>()};
            if (inst.is_array() && ! inst.empty()) {
                std::vector<std::string> out;
                for (const auto & s : inst) {
                    if (! s.is_string())
                        throw fail(400, "'instance' entries must be strings");
                    out.push_back(s.get<std::string>());
                }
                return out;
            }
            throw fail(400, "'instance' must be a string or a non-empty array of strings");
        }

        auto read_mode(const json & body) -> solver::Mode
        {
            auto m = body.value("mode", std::string("study"));
            if (m == "study")
                return solver::Mode::study;
            if (m == "exam")
                return solver::Mode::exam;
            throw fail(400, "mode must be 'study' or 'exam'");
        }

        auto new_id() -> std::string
        {
            static std::mutex m;
            static std::mt19937_64 rng{std::random_device{}()};
            std::lock_guard lock(m);
            std::ostringstream out;
            out << std::hex << rng();
            return out.str();
        }

        auto read_assumption(const Session & s, const json & body) -> Assumption
        {
            if (! body.contains("module") || ! body.at("module").is_string())
                throw fail(400, "missing string field 'module'");
            if (! body.contains("semester") || ! body.at("semester").is_number_integer())
                throw fail(400, "missing integer field 'semester'");
            Assumption a{body.at("module").get<std::string>(), body.at("semester").get<int>(),
                parse_polarity(body.value("polarity", std::string("assigned")))};
            if (! s.instance.regulation.modules.contains(a.module))
                throw fail(422, "unknown module '" + a.module + "'");
            if (a.semester < 1 || a.semester > s.horizon)
                throw fail(422, "semester " + std::to_string(a.semester) + " outside 1.." + std::to_string(s.horizon));
            return a;
        }
    }

    SessionStore::SessionStore(Options options) :
        _options(std::move(options))
    {
        if (_options.snapshot_dir) {
            std::filesystem::create_directories(*_options.snapshot_dir);
            restore();
        }
    }

    SessionStore::~SessionStore() = default;

    auto SessionStore::size() const -> std::size_t
    {
        std::shared_lock lock(_mutex);
        return _sessions.size();
    }

    auto SessionStore::find(const std::string & id) -> std::shared_ptr<Session>
    {
        std::shared_lock lock(_mutex);
        auto it = _sessions.find(id);
        if (it == _sessions.end())
            throw fail(404, "unknown session '" + id + "'");
        return it->second;
    }

    auto SessionStore::create(const json & body) -> json
    {
        if (! body.is_object())
            throw fail(400, "request body must be an object");
        if (! body.contains("horizon") || ! body.at("horizon").is_number_integer())
            throw fail(400, "missing integer field 'horizon'");
        std::uint64_t budget = _options.node_budget;
        if (body.contains("node_budget")) {
            const auto & b = body.at("node_budget");
            if (! b.is_number_integer() || (! b.is_number_unsigned() && b.get<long long>() < 0))
                throw fail(400, "'node_budget' must be a non-negative integer");
            budget = body.at("node_budget").get<std::uint64_t>();
        }
        auto session =
            std::make_shared<Session>(new_id(), read_sources(body), body.at("horizon").get<int>(), read_mode(body), budget);
        json state = session->state();
        persist(*session);
        std::unique_lock lock(_mutex);
        _sessions.emplace(session->id, std::move(session));
        return state;
    }

    auto SessionStore::get(const std::string & id) -> json
    {
        auto s = find(id);
        std::shared_lock lock(s->mutex);
        return s->state();
    }

    auto SessionStore::add_assumption(const std::string & id, const json & body) -> json
    {
        auto s = find(id);
        std::unique_lock lock(s->mutex);
        if (! body.is_object())
            throw fail(400, "request body must be an object");
        Assumption a = read_assumption(*s, body);
        for (const auto & b : s->assumptions)
            if (b.module == a.module && b.semester == a.semester)
                throw fail(422, a.module + "@" + std::to_string(a.semester) + " is already an assumption");
        if (a.polarity == Polarity::assigned && ! s->report.semesters[a.semester - 1].possible.contains(a.module))
            throw fail(422, a.module + " is not possible in semester " + std::to_string(a.semester));

        auto extended = s->assumptions;
        extended.push_back(a);
        auto report = solver::consequences(s->request(extended));
        if (! report.satisfiable)
            throw ServiceError(409, json{{"error", "assumption makes the plan unsatisfiable"}, {"complete", report.complete}});

        s->assumptions = std::move(extended);
        s->report = std::move(report);
        s->leave_browsing();
        persist(*s);
        return s->state();
    }

    auto SessionStore::remove_assumption(const std::string & id, const std::string & module, int semester) -> json
    {
        auto s = find(id);
        std::unique_lock lock(s->mutex);
        auto it = std::find_if(s->assumptions.begin(), s->assumptions.end(),
            [&](const Assumption & a) { return a.module == module && a.semester == semester; });
        if (it == s->assumptions.end())
            throw fail(422, module + "@" + std::to_string(semester) + " is not a user assumption");
        s->assumptions.erase(it);
        s->recompute();
        s->leave_browsing();
        persist(*s);
        return s->state();
    }

    auto SessionStore::next(const std::string & id) -> json
    {
        auto s = find(id);
        std::unique_lock lock(s->mutex);
        if (! s->report.satisfiable && s->report.complete)
            throw fail(409, "no admissible plan under the current assumptions");
        s->advance();
        persist(*s);
        return s->state();
    }

    auto SessionStore::reset(const std::string & id) -> json
    {
        auto s = find(id);
        std::unique_lock lock(s->mutex);
        s->assumptions.clear();
        s->recompute();
        s->leave_browsing();
        persist(*s);
        return s->state();
    }

    void SessionStore::persist(const Session & session) const
    {
        if (! _options.snapshot_dir)
            return;
        auto path = *_options.snapshot_dir / (session.id + ".json");
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp);
            out << session.snapshot().dump(2) << '\n';
            if (! out)
                throw fail(500, "cannot write snapshot " + tmp.string());
        }
        std::filesystem::rename(tmp, path);
    }

    void SessionStore::restore()
    {
        for (const auto & entry : std::filesystem::directory_iterator(*_options.snapshot_dir)) {
            if (entry.path().extension() != ".json")
                continue;
            try {
                std::ifstream in(entry.path());
                json snap = json::parse(in);
                auto s = std::make_shared<Session>(snap.at("id").get<std::string>(),
                    snap.at("sources").get<std::vector<std::string>>(), snap.at("horizon").get<int>(), read_mode(snap),
                    snap.at("node_budget").get<std::uint64_t>());
                for (const auto & a : snap.at("assumptions"))
                    s->assumptions.push_back(
                        {a.at("module").get<std::string>(), a.at("semester").get<int>(), parse_polarity(a.at("polarity").get<std::string>())});
                s->recompute();
                for (std::size_t i = 0, n = snap.at("browsed").get<std::size_t>(); i < n; ++i)
                    s->advance();
                _sessions.emplace(s->id, std::move(s));
            }
            catch (const std::exception & e) {
                std::cerr << "skipping snapshot " << entry.path() << ": " << e.what() << '\n';
            }
        }
    }

    struct Server::Impl
    {
        explicit Impl(SessionStore & s) :
            store(s)
        {
        }

        SessionStore & store;
        httplib::Server http;
    };

    namespace
    {
        template <typename F>
        auto route(F f, int success = 200)
        {
            return [f, success](const httplib::Request & req, httplib::Response & res) {
                json out;
                try {
                    out = f(req);
                    res.status = success;
                }
                catch (const ServiceError & e) {
                    out = e.body();
                    res.status = e.status();
                }
                catch (const json::exception & e) {
                    out = {{"error", std::string("malformed request: ") + e.what()}};
                    res.status = 400;
                }
                catch (const std::exception & e) {
                    out = {{"error", e.what()}};
                    res.status = 500;
                }
                res.set_content(out.dump(), "application/json");
            };
        }

        auto body_of(const httplib::Request & req) -> json { return req.body.empty() ? json::object() : json::parse(req.body); }
    }

    Server::Server(SessionStore & store) :
        _impl(std::make_unique<Impl>(store))
    {
        auto & http = _impl->http;
        auto & s = _impl->store;
        http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
            {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}, {"Access-Control-Allow-Headers", "Content-Type"}});
        http.Options(R"(/.*)", [](const httplib::Request &, httplib::Response & res) { res.status = 204; });

        http.Post("/sessions", route([&s](const httplib::Request & req) { return s.create(body_of(req)); }, 201));
        http.Get(R"(/sessions/([^/]+))", route([&s](const httplib::Request & req) { return s.get(req.matches[1]); }));
        http.Post(R"(/sessions/([^/]+)/assumptions)",
            route([&s](const httplib::Request & req) { return s.add_assumption(req.matches[1], body_of(req)); }));
        http.Delete(R"(/sessions/([^/]+)/assumptions/([^/]+)/(-?[0-9]+))", route([&s](const httplib::Request & req) {
            return s.remove_assumption(req.matches[1], req.matches[2], std::stoi(req.matches[3]));
        }));
        http.Post(R"(/sessions/([^/]+)/next)", route([&s](const httplib::Request & req) { return s.next(req.matches[1]); }));
        http.Post(R"(/sessions/([^/]+)/reset)", route([&s](const httplib::Request & req) { return s.reset(req.matches[1]); }));
    }

    Server::~Server() = default;

    auto Server::bind(const std::string & host, int port) -> int
    {
        if (port == 0)
            return _impl->http.bind_to_any_port(host);
        if (! _impl->http.bind_to_port(host, port))
            throw Error("cannot bind " + host + ":" + std::to_string(port));
        return port;
    }

    void Server::listen() { _impl->http.listen_after_bind(); }
    void Server::stop() { _impl->http.stop(); }
}
