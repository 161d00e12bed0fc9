#pragma once

#include <regula/error.hpp>
#include <regula/model.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

/// Interactive plan building over HTTP: sessions hold an instance, a horizon and user
/// assumptions, and every mutation answers with the recomputed state document.
namespace regula::service
{
    using nlohmann::json;

    /// A request the service refuses; `status` is the HTTP status to answer with.
    class ServiceError : public Error
    {
    public:
        ServiceError(int status, json body);

        [[nodiscard]] auto status() const noexcept -> int { return _status; }
        [[nodiscard]] auto body() const -> const json & { return _body; }

    private:
        int _status;
        json _body;
    };

    struct Options
    {
        /// When set, each session is written to `<dir>/<id>.json` after every mutation and
        /// reloaded on startup.
        std::optional<std::filesystem::path> snapshot_dir;
        /// Default node budget per solver query; 0 means unlimited.
        std::uint64_t node_budget = 0;
    };

    class Session;

    /// Thread-safe session registry. Mutations of one session are serialized; reads may overlap.
    class SessionStore
    {
    public:
        explicit SessionStore(Options options = {});
        ~SessionStore();
        SessionStore(const SessionStore &) = delete;
        auto operator=(const SessionStore &) -> SessionStore & = delete;

        /// Body: {"instance": text or [texts], "horizon": n, "mode"?: "study"|"exam", "node_budget"?: k}.
        auto create(const json & body) -> json;
        auto get(const std::string & id) -> json;
        /// Body: {"module": m, "semester": i, "polarity"?: "assigned"|"excluded"}.
        auto add_assumption(const std::string & id, const json & body) -> json;
        auto remove_assumption(const std::string & id, const std::string & module, int semester) -> json;
        /// Next plan in the deterministic order; wraps to the first after the last.
        auto next(const std::string & id) -> json;
        /// Drops all assumptions and leaves browsing mode.
        auto reset(const std::string & id) -> json;

        [[nodiscard]] auto size() const -> std::size_t;

    private:
        auto find(const std::string & id) -> std::shared_ptr<Session>;
        void persist(const Session & session) const;
        void restore();

        Options _options;
        mutable std::shared_mutex _mutex;
        std::map<std::string, std::shared_ptr<Session>> _sessions;
    };

    /// HTTP front of a SessionStore.
    class Server
    {
    public:
        explicit Server(SessionStore & store);
        ~Server();
        Server(const Server &) = delete;
        auto operator=(const Server &) -> Server & = delete;

        /// Binds to host:port (port 0 picks a free one) and returns the bound port.
        auto bind(const std::string & host, int port) -> int;
        /// Serves until stop(); call after bind().
        void listen();
        void stop();

    private:
        struct Impl;
        std::unique_ptr<Impl> _impl;
    };
}
