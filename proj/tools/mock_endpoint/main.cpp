// Serves a directory of `<YYYY-MM-DD>.txt` replies as a chat-completion endpoint.

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "lookahead/mock_endpoint.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) {
    g_stop = true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Offline chat-completion endpoint replaying fixture files"};
    std::string fixtures;
    std::string host = "127.0.0.1";
    int port = 8080;
    app.add_option("--fixtures", fixtures, "Directory of <YYYY-MM-DD>.txt replies")->required()->check(CLI::ExistingDirectory);
    app.add_option("--host", host, "Bind address");
    app.add_option("--port", port, "Port (0 picks a free one)");
    CLI11_PARSE(app, argc, argv);

    try {
        lookahead::MockChatServer server(fixtures, host, port);
        std::cout << server.base_url() << std::endl;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        while (!g_stop) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
        server.stop();
    } catch (const std::exception& e) {
        std::cerr << "mock endpoint: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
