#include "causagen/bridge.hpp"

#include "causagen/error.hpp"

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

namespace causagen {

using nlohmann::json;

namespace {

json schema_json(const Schema& schema) {
  json cols = json::array();
  for (const auto& c : schema.columns()) {
    json col{{"name", c.name}, {"kind", c.is_categorical() ? "categorical" : "numeric"}};
    if (c.is_categorical()) col["categories"] = c.categories;
    cols.push_back(std::move(col));
  }
  return cols;
}

Schema schema_from(const json& j) {
  std::vector<ColumnSchema> cols;
  for (const auto& c : j) {
    ColumnSchema col;
    col.name = c.at("name").get<std::string>();
    const auto kind = c.value("kind", std::string("numeric"));
    if (kind == "categorical") {
      col.kind = ColumnKind::categorical;
      col.categories = c.at("categories").get<std::vector<std::string>>();
    } else if (kind != "numeric") {
      throw DataError("unknown column kind: " + kind);
    }
    cols.push_back(std::move(col));
  }
  return Schema(std::move(cols));
}

Eigen::MatrixXd matrix_from_rows(const json& rows, std::size_t d) {
  if (!rows.is_array()) throw DataError("bridge: data is not an array of rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!r.is_array() || r.size() != d) throw DataError("bridge: row " + std::to_string(i) + " has wrong width");
    for (std::size_t j = 0; j < d; ++j) {
      if (!r[j].is_number()) throw DataError("bridge: non-numeric cell");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[j].get<double>();
    }
  }
  return m;
}

}  // namespace

json encode_table_rows(const Table& t) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < t.cols(); ++j) row.push_back(t.values()(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json encode_generate_request(const GenerationRequest& req) {
  const auto& names = req.plan.columns.names();
  json order = json::array();
  for (auto v : req.plan.order) order.push_back(names[v]);
  json conditioning = json::object();
  for (std::size_t v = 0; v < names.size(); ++v) {
    json c = json::array();
    for (auto u : req.plan.conditioning[v]) c.push_back(names[u]);
    conditioning[names[v]] = std::move(c);
  }
  return json{
      {"op", "generate"},
      {"protocol", kBridgeProtocol},
      {"schema", schema_json(req.train.schema())},
      {"train", encode_table_rows(req.train)},
      {"plan", {{"strategy", to_string(req.plan.strategy)}, {"order", order}, {"conditioning", conditioning}}},
      {"n_samples", req.n_samples},
      {"permutations", req.permutations},
      {"seed", req.seed},
  };
}

GenerationRequest decode_generate_request(const json& j) {
  GenerationRequest req;
  const Schema schema = schema_from(j.at("schema"));
  req.train = Table(schema, matrix_from_rows(j.at("train"), schema.size()));
  const auto& plan = j.at("plan");
  req.plan.strategy = parse_strategy(plan.value("strategy", std::string("vanilla")));
  req.plan.columns = NodeSet(schema.names());
  for (const auto& name : plan.at("order")) req.plan.order.push_back(schema.index_of(name.get<std::string>()));
  req.plan.conditioning.assign(schema.size(), {});
  for (const auto& [name, cond] : plan.at("conditioning").items()) {
    auto& c = req.plan.conditioning[schema.index_of(name)];
    for (const auto& u : cond) c.push_back(schema.index_of(u.get<std::string>()));
  }
  if (!req.plan.is_consistent()) throw DataError("bridge: inconsistent plan");
  req.n_samples = j.at("n_samples").get<std::size_t>();
  req.permutations = j.value("permutations", 3);
  req.seed = j.value("seed", std::uint64_t{0});
  return req;
}

Table decode_generate_response(const json& response, const Schema& schema, std::size_t n_samples) {
  if (!response.value("ok", false))
    throw DataError("bridge error: " + response.value("error", std::string("unknown failure")));
  const auto& rows = response.at("data");
  if (rows.size() != n_samples)
    throw DataError("bridge returned " + std::to_string(rows.size()) + " rows, expected " +
                    std::to_string(n_samples));
  return Table(schema, matrix_from_rows(rows, schema.size()));
}

BridgeProcess::BridgeProcess(const std::string& command) {
  int fds[2];
  if (socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0)
    throw DataError(std::string("bridge: socketpair failed: ") + std::strerror(errno));
  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw DataError(std::string("bridge: fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    close(fds[0]);
    dup2(fds[1], STDIN_FILENO);
    dup2(fds[1], STDOUT_FILENO);
    if (fds[1] > STDOUT_FILENO) close(fds[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);
  pid_ = pid;
  to_child_ = from_child_ = fds[0];
}

BridgeProcess::~BridgeProcess() {
  if (to_child_ >= 0) close(to_child_);
  if (pid_ > 0 && !finished_) {
    using namespace std::chrono_literals;
    for (int i = 0; i < 200; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) == pid_) return;
      std::this_thread::sleep_for(10ms);
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
  }
}

void BridgeProcess::write_line(const std::string& line) {
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const auto n = send(to_child_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw DataError(std::string("bridge: write failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string BridgeProcess::read_line() {
  for (;;) {
    if (const auto pos = buffer_.find('\n'); pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      return line;
    }
    char chunk[65536];
    const auto n = read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw DataError("bridge: process closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

json BridgeProcess::call(const json& request) {
  if (finished_) throw DataError("bridge: process already shut down");
  write_line(request.dump());
  const auto line = read_line();
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("bridge: malformed response: ") + e.what());
  }
}

int BridgeProcess::shutdown() {
  if (finished_) return 0;
  try {
    write_line(json{{"op", "shutdown"}}.dump());
    read_line();
  } catch (const DataError&) {
    // The child may exit before acknowledging.
  }
  close(to_child_);
  to_child_ = from_child_ = -1;
  int status = 0;
  waitpid(pid_, &status, 0);
  finished_ = true;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

BridgeGenerator::BridgeGenerator(const std::string& command)
    : process_(std::make_unique<BridgeProcess>(command)) {
  handshake_ = process_->call(json{{"op", "handshake"}, {"protocol", kBridgeProtocol}});
  if (!handshake_.value("ok", false)) throw DataError("bridge handshake failed: " + handshake_.dump());
  if (handshake_.value("protocol", 0) != kBridgeProtocol)
    throw DataError("bridge speaks protocol " + handshake_.value("protocol", json()).dump() + ", expected " +
                    std::to_string(kBridgeProtocol));
}

BridgeGenerator::~BridgeGenerator() {
  if (process_) process_->shutdown();
}

Table BridgeGenerator::generate(const GenerationRequest& req) const {
  if (req.plan.columns.names() != req.train.schema().names())
    throw DataError("generate: plan columns do not match the training schema");
  std::lock_guard lock(mutex_);
  const auto response = process_->call(encode_generate_request(req));
  return decode_generate_response(response, req.train.schema(), req.n_samples);
}

}  // namespace causagen
