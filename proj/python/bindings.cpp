#include <memory>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coordlens/bundle.hpp"
#include "coordlens/classify.hpp"
#include "coordlens/codec.hpp"
#include "coordlens/error.hpp"
#include "coordlens/session.hpp"
#include "coordlens/synth.hpp"

namespace py = pybind11;
using namespace coordlens;
using nlohmann::json;

namespace {

std::vector<std::string> encode(const std::vector<Notification>& notes) {
  std::vector<std::string> out;
  out.reserve(notes.size());
  for (const auto& n : notes) out.push_back(codec::dump(codec::to_json(n)));
  return out;
}

class PySession {
 public:
  explicit PySession(Session s) : session_(std::move(s)) {}

  static PySession open(const std::string& path) {
    return PySession(Session::create(std::make_shared<const AppBundle>(load_bundle(path))));
  }

  static PySession restore(const std::string& path, const std::string& snapshot) {
    return PySession(Session::restore(std::make_shared<const AppBundle>(load_bundle(path)), json::parse(snapshot)));
  }

  std::vector<std::string> dispatch(const std::string& line) {
    Command cmd;
    try {
      cmd = codec::command_from_json(json::parse(line));
    } catch (const json::parse_error& e) {
      return encode({ErrorNotice{session_.revision(), ErrorCode::InvalidCommand, e.what()}});
    } catch (const Error& e) {
      return encode({ErrorNotice{session_.revision(), e.code(), e.what()}});
    }
    return encode(session_.dispatch(cmd));
  }

  std::vector<std::string> full_state() const { return encode(session_.full_state()); }
  std::string snapshot() const { return codec::dump(session_.snapshot()); }
  std::uint64_t revision() const { return session_.revision(); }
  std::vector<std::string> view_ids() const { return session_.view_ids(); }
  std::pair<std::size_t, std::size_t> status() const {
    const StatusUpdate s = session_.status();
    return {s.selected, s.total};
  }

 private:
  Session session_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "coordlens engine bindings; JSON travels as strings";

  static py::exception<Error> error_type(m, "CoordLensError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const BundleInvalidError& e) {
      py::set_error(error_type, (std::string("BundleInvalid: ") + e.report().to_json().dump()).c_str());
    } catch (const Error& e) {
      py::set_error(error_type, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def(
      "validate",
      [](const std::string& path) { return validate_bundle(load_bundle(path)).to_json().dump(); },
      py::arg("path"), "Validation report of a bundle directory as JSON text.");

  m.def(
      "generate",
      [](const std::string& name, const std::string& out_dir, std::uint64_t seed) {
        const auto gen = synth::by_name(name, seed);
        if (!gen) throw Error(ErrorCode::InvalidCommand, "unknown synthetic bundle '" + name + "'");
        gen->write(out_dir);
      },
      py::arg("name"), py::arg("out_dir"), py::arg("seed") = 1);

  m.def(
      "classify",
      [](const std::vector<double>& values, const std::string& method, std::size_t k) {
        const auto m = parse_class_method(method);
        if (!m) throw Error(ErrorCode::InvalidCommand, "unknown method '" + method + "'");
        return classify(values, *m, k).breaks;
      },
      py::arg("values"), py::arg("method"), py::arg("k"));

  py::class_<PySession>(m, "Session")
      .def(py::init(&PySession::open), py::arg("path"))
      .def_static("restore", &PySession::restore, py::arg("path"), py::arg("snapshot"))
      .def("dispatch", &PySession::dispatch, py::arg("command"))
      .def("full_state", &PySession::full_state)
      .def("snapshot", &PySession::snapshot)
      .def("status", &PySession::status)
      .def("view_ids", &PySession::view_ids)
      .def_property_readonly("revision", &PySession::revision);
}
