#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace procure {

// Base class for every error the toolkit throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, int line, std::string message)
      : Error("syntax error at line " + std::to_string(line) + ": " + message),
        position_(position),
        line_(line),
        message_(std::move(message)) {}

  std::size_t position() const noexcept { return position_; }
  int line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t position_;
  int line_;
  std::string message_;
};

class MissingEntryPoint : public Error {
 public:
  explicit MissingEntryPoint(std::string name)
      : Error("entry point '" + name + "' is not defined"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class UnsupportedConstruct : public Error {
 public:
  explicit UnsupportedConstruct(std::string kind)
      : Error("unsupported construct: " + kind), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class NotApplicable : public Error {
 public:
  using Error::Error;
};

class SandboxUnavailable : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class MalformedResponse : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, std::string field)
      : Error("schema error at line " + std::to_string(line) + ": field '" + field + "'"),
        line_(line),
        field_(std::move(field)) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class OrphanCounterfactual : public Error {
 public:
  explicit OrphanCounterfactual(std::string task_id)
      : Error("counterfactual without original: " + task_id), task_id_(std::move(task_id)) {}
  const std::string& task_id() const noexcept { return task_id_; }

 private:
  std::string task_id_;
};

class GroupTooLarge : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace procure
