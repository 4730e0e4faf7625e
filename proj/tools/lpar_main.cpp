// lpar: command-line front end for the platform.
//   lpar serve  --config <path> --data-dir <path> --port <n>
//   lpar chat   --config <path> --app <id>
//   lpar agents --config <path> --app <id>
//   lpar script --config <path> --app <id> --file <transcript>

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "lpar/common/error.hpp"
#include "lpar/gateway/channels.hpp"
#include "lpar/gateway/config.hpp"
#include "lpar/gateway/http_server.hpp"
#include "lpar/gateway/platform.hpp"

namespace fs = std::filesystem;
using namespace lpar;

namespace {

struct Common {
    std::string config;
    std::string app;
    std::string data_dir;
    std::int64_t clock_start = 0;
};

// Loads the config and, when a data dir holds snapshots, the stored state.
std::string boot(gateway::Platform &platform, const Common &c) {
    const auto config = gateway::load_config(c.config);
    if (!c.app.empty() && c.app != config.app.app_id) {
        throw Error(ErrorCode::unknown_app, "config " + c.config + " defines app " + config.app.app_id + ", not " + c.app);
    }
    platform.load_app(config);
    if (!c.data_dir.empty() && fs::exists(c.data_dir)) platform.restore(c.data_dir);
    return config.app.app_id;
}

void add_common(CLI::App *cmd, Common &c, bool with_app) {
    cmd->add_option("--config", c.config, "app config file (JSON)")->required()->check(CLI::ExistingFile);
    if (with_app) cmd->add_option("--app", c.app, "app id (defaults to the config's app)");
    cmd->add_option("--clock-start", c.clock_start, "initial logical clock value in ms");
}

int serve(const Common &c, const std::string &address, std::uint16_t port) {
    // Block the signals before any thread starts so only sigwait sees them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    gateway::Platform platform({c.clock_start, {}});
    boot(platform, c);
    gateway::ServerOptions options{address, port, std::nullopt};
    if (!c.data_dir.empty()) options.data_dir = c.data_dir;
    gateway::HttpServer server(platform, options);
    server.start();
    std::cout << "listening on http://" << address << ":" << server.port() << std::endl;

    int received = 0;
    sigwait(&signals, &received);
    server.stop();
    std::cout << "stopped" << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App cli{"lpar multi-agent conversational platform"};
    cli.require_subcommand(1);
    Common common;

    std::string address = "127.0.0.1";
    std::uint16_t port = 8080;
    auto *serve_cmd = cli.add_subcommand("serve", "run the HTTP/WebSocket gateway");
    add_common(serve_cmd, common, false);
    serve_cmd->add_option("--data-dir", common.data_dir, "snapshot directory");
    serve_cmd->add_option("--port", port, "TCP port (0 picks one)");
    serve_cmd->add_option("--address", address, "bind address");

    std::string user = "cli-user";
    auto *chat_cmd = cli.add_subcommand("chat", "interactive chat on stdin/stdout");
    add_common(chat_cmd, common, true);
    chat_cmd->add_option("--data-dir", common.data_dir, "snapshot directory (restored at start, written on :quit)");
    chat_cmd->add_option("--user", user, "channel-local user name");

    auto *agents_cmd = cli.add_subcommand("agents", "list the app's agents as JSON");
    add_common(agents_cmd, common, true);
    agents_cmd->add_option("--data-dir", common.data_dir, "snapshot directory (ratings are restored from it)");

    std::string file;
    auto *script_cmd = cli.add_subcommand("script", "replay a transcript; exit 1 if an expectation fails");
    add_common(script_cmd, common, true);
    script_cmd->add_option("--file", file, "transcript file")->required()->check(CLI::ExistingFile);
    script_cmd->add_option("--user", user, "channel-local user name");

    CLI11_PARSE(cli, argc, argv);

    try {
        if (*serve_cmd) return serve(common, address, port);

        gateway::Platform platform({common.clock_start, {}});
        const auto app_id = boot(platform, common);

        if (*chat_cmd) {
            gateway::ReplOptions options;
            options.user = user;
            if (!common.data_dir.empty()) options.data_dir = common.data_dir;
            return gateway::run_repl(platform, app_id, std::cin, std::cout, options);
        }
        if (*agents_cmd) {
            std::cout << platform.agents_json(app_id).dump(2) << "\n";
            return 0;
        }
        if (*script_cmd) {
            std::ifstream in(file);
            const auto lines = gateway::parse_transcript(in);
            const auto summary = gateway::run_script(platform, app_id, lines, std::cout, std::cerr, user);
            std::cerr << summary.turns << " turns, " << summary.failed_assertions << " failed assertions\n";
            return summary.failed_assertions == 0 ? 0 : 1;
        }
    } catch (const Error &e) {
        std::cerr << "error " << to_string(e.code()) << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
