#pragma once

#include <memory>
#include <optional>
#include <string>

#include "traitkit/store.hpp"
#include "traitkit/trait_models.hpp"

namespace httplib {
class Server;
}

namespace traitkit::service {

struct ServiceConfig {
  std::string store_dir;
  std::string static_dir;  // web UI bundle served at /; optional
  std::string bundle_dir;  // trained model bundle for /api/predict; optional
};

// JSON API over a CohortStore: questionnaire scoring with cohort comparison,
// cohort summaries and trait prediction. The service never trains models.
class Service {
 public:
  explicit Service(const ServiceConfig& config);
  ~Service();

  store::CohortStore& store() { return store_; }
  httplib::Server& server() { return *server_; }

  // Blocks until stop() is called from another thread.
  bool listen(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  ServiceConfig config_;
  store::CohortStore store_;
  std::optional<models::ModelBundle> bundle_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace traitkit::service
