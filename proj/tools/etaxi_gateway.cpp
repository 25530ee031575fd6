#include "etaxi/gateway.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Control service for live simulation runs (HTTP + WebSocket)"};
    std::string host = "127.0.0.1";
    unsigned short port = 8080;
    int threads = 2;
    app.add_option("--host", host, "address to bind");
    app.add_option("--port", port, "port to listen on (0 picks a free one)");
    app.add_option("--threads", threads, "I/O threads")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);  // before any thread starts

    etaxi::RunManager runs;
    try {
        etaxi::GatewayServer server(runs, host, port, threads);
        std::cout << "listening on " << host << ":" << server.port() << std::endl;
        int sig = 0;
        sigwait(&set, &sig);
        std::cout << "shutting down" << std::endl;
        server.stop();
    } catch (const std::exception& e) {
        std::cerr << "gateway: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
