#include "coda/env/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "coda/env/task.hpp"

namespace coda::env {

namespace {

struct ScreenSpec {
  std::string id;
  std::string title;
  std::vector<std::pair<std::string, std::string>> fields;  // label, initial value
  std::vector<std::pair<std::string, bool>> toggles;
  std::vector<std::string> presses;
  std::vector<std::string> items;  // draggable
  std::string canvas;
};

struct AppSpec {
  std::string name;
  bool menu_navigation = false;
  std::string menu_label;
  FocusMode focus = FocusMode::kClick;
  std::vector<ScreenSpec> screens;
  std::vector<std::string> vocabulary;
};

std::string slug(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  return out;
}

// Fixed layout on a 1280x800 screen. Neighbouring fields, toggles and menu
// items sit 8 px apart, so their values merge once the render is scaled to
// 1/8 of native width or less.
SoftwareModel build(const AppSpec& app) {
  std::vector<Screen> screens;
  std::vector<Widget> widgets;
  auto add = [&](Widget w) { widgets.push_back(std::move(w)); };

  for (std::size_t i = 0; i < app.screens.size(); ++i) screens.push_back({app.screens[i].id, app.screens[i].title});

  if (app.menu_navigation) {
    const std::string menu_id = "menu." + slug(app.menu_label);
    add({menu_id, WidgetKind::kMenu, {20, 10, 120, 32}, app.menu_label, "", true, kAllScreens, "", {}});
    for (std::size_t i = 0; i < app.screens.size(); ++i) {
      const auto& s = app.screens[i];
      add({"item." + s.id, WidgetKind::kMenuItem, {20, 52 + static_cast<int>(i) * 42, 200, 34}, s.title, "", false,
           kAllScreens, menu_id, {ClickEffect::Kind::kNavigate, s.id}});
    }
  } else {
    for (std::size_t i = 0; i < app.screens.size(); ++i) {
      const auto& s = app.screens[i];
      add({"tab." + s.id, WidgetKind::kButton, {20 + static_cast<int>(i) * 160, 10, 150, 32}, s.title, "", true,
           kAllScreens, "", {ClickEffect::Kind::kNavigate, s.id}});
    }
  }

  for (const auto& s : app.screens) {
    for (std::size_t k = 0; k < s.fields.size(); ++k) {
      add({s.id + "." + slug(s.fields[k].first), WidgetKind::kTextField, {300 + static_cast<int>(k) * 268, 120, 260, 36},
           s.fields[k].first, s.fields[k].second, true, s.id, "", {}});
    }
    for (std::size_t k = 0; k < s.toggles.size(); ++k) {
      add({s.id + "." + slug(s.toggles[k].first), WidgetKind::kToggle, {300 + static_cast<int>(k) * 188, 200, 180, 30},
           s.toggles[k].first, s.toggles[k].second ? "on" : "off", true, s.id, "", {}});
    }
    for (std::size_t k = 0; k < s.presses.size(); ++k) {
      add({s.id + "." + slug(s.presses[k]), WidgetKind::kButton, {300 + static_cast<int>(k) * 220, 270, 200, 36},
           s.presses[k], "", true, s.id, "", {ClickEffect::Kind::kPress, ""}});
    }
    for (std::size_t k = 0; k < s.items.size(); ++k) {
      add({s.id + "." + slug(s.items[k]), WidgetKind::kButton, {300 + static_cast<int>(k) * 170, 340, 160, 34},
           s.items[k], "", true, s.id, "", {}});
    }
    if (!s.canvas.empty()) {
      add({s.id + "." + slug(s.canvas), WidgetKind::kCanvas, {300, 420, 600, 300}, s.canvas, "", true, s.id, "", {}});
    }
  }

  std::vector<Hotkey> hotkeys = {{"escape", Hotkey::Kind::kCloseMenus}, {"ctrl+s", Hotkey::Kind::kNone}};
  return SoftwareModel(app.name, {1280, 800}, std::move(screens), std::move(widgets), std::move(hotkeys), app.focus,
                       app.vocabulary);
}

std::vector<AppSpec> builtin_specs() {
  std::vector<AppSpec> apps;
  apps.push_back({"algebra", false, "", FocusMode::kClick,
                  {{"worksheet", "Worksheet", {{"Expression", ""}, {"Variable", "x"}}, {{"Exact mode", false}}, {"Simplify"}, {}, ""},
                   {"solver", "Solver", {{"Tolerance", "1e-6"}, {"Iterations", "50"}}, {{"Verbose log", false}}, {"Solve"}, {}, ""},
                   {"plot", "Plot", {{"Domain", ""}, {"Samples", "200"}}, {{"Grid lines", false}, {"Legend", true}}, {"Render"}, {}, ""}},
                  {"0.001", "100", "x^2+1", "sin(t)", "-10..10", "42", "3.14"}});
  apps.push_back({"biochem", true, "Window", FocusMode::kDoubleClick,
                  {{"structure", "Structure", {{"Residue", ""}}, {{"Hydrogens", false}, {"Surface", false}}, {"Align"},
                    {"Ligand A", "Ligand B"}, "Viewer"},
                   {"sequence", "Sequence", {{"Chain", "A"}, {"Motif", ""}}, {}, {"Search"}, {}, ""},
                   {"dynamics", "Dynamics", {{"Temperature", "300"}, {"Timestep", "1.0"}}, {{"Solvent", true}}, {"Simulate"}, {}, ""}},
                  {"310", "2.0", "GLY", "ATGC", "B", "0.5", "HIS"}});
  apps.push_back({"gis", false, "", FocusMode::kClick,
                  {{"map", "Map", {}, {{"Basemap", true}}, {}, {"Rivers", "Roads", "Parcels"}, "Map view"},
                   {"query", "Query", {{"Attribute", ""}, {"Threshold", "0"}}, {{"Case sensitive", false}}, {"Run query"}, {}, ""},
                   {"export", "Export", {{"File name", ""}, {"DPI", "96"}}, {{"Compress", false}}, {"Save image"}, {}, ""}},
                  {"area", "500", "out.png", "300", "population", "12", "roads.tif"}});
  apps.push_back({"astron", true, "Tools", FocusMode::kClick,
                  {{"sky", "Sky", {{"Right ascension", ""}, {"Declination", ""}}, {{"Constellations", false}, {"Grid overlay", false}},
                    {"Slew"}, {}, ""},
                   {"catalog", "Catalog", {{"Object name", ""}, {"Magnitude limit", "6"}}, {}, {"Lookup"},
                    {"M31", "M42"}, "Finder chart"},
                   {"camera", "Camera", {{"Exposure", "1"}, {"Gain", "0"}}, {{"Cooling", false}}, {"Capture"}, {}, ""}},
                  {"10h45m", "-59.7", "M31", "30", "120", "9.5", "Vega"}});
  return apps;
}

nlohmann::json rect_json(const Rect& r) { return {r.x, r.y, r.w, r.h}; }

const char* effect_name(ClickEffect::Kind k) {
  switch (k) {
    case ClickEffect::Kind::kNavigate:
      return "navigate";
    case ClickEffect::Kind::kPress:
      return "press";
    case ClickEffect::Kind::kNone:
      break;
  }
  return "none";
}

const char* hotkey_name(Hotkey::Kind k) {
  switch (k) {
    case Hotkey::Kind::kCloseMenus:
      return "close_menus";
    case Hotkey::Kind::kNextScreen:
      return "next_screen";
    case Hotkey::Kind::kNone:
      break;
  }
  return "none";
}

}  // namespace

nlohmann::json model_to_json(const SoftwareModel& m) {
  nlohmann::json screens = nlohmann::json::array();
  for (const auto& s : m.screens()) screens.push_back({{"id", s.id}, {"title", s.title}});
  nlohmann::json widgets = nlohmann::json::array();
  for (const auto& w : m.widgets()) {
    widgets.push_back({{"id", w.id},
                       {"kind", to_string(w.kind)},
                       {"bbox", rect_json(w.bbox)},
                       {"label", w.label},
                       {"value", w.value},
                       {"visible", w.visible},
                       {"screen", w.screen},
                       {"parent_menu", w.parent_menu},
                       {"effect", {{"kind", effect_name(w.effect.kind)}, {"screen", w.effect.screen}}}});
  }
  nlohmann::json hotkeys = nlohmann::json::array();
  for (const auto& h : m.hotkeys()) hotkeys.push_back({{"key", h.key}, {"kind", hotkey_name(h.kind)}});
  return {{"name", m.name()},
          {"native", {m.native().width, m.native().height}},
          {"focus_mode", m.focus_mode() == FocusMode::kClick ? "click" : "double_click"},
          {"screens", screens},
          {"widgets", widgets},
          {"hotkeys", hotkeys},
          {"vocabulary", m.value_vocabulary()}};
}

SoftwareModel model_from_json(const nlohmann::json& j) {
  try {
    std::vector<Screen> screens;
    for (const auto& s : j.at("screens")) screens.push_back({s.at("id"), s.value("title", s.at("id").get<std::string>())});
    std::vector<Widget> widgets;
    for (const auto& w : j.at("widgets")) {
      Widget x;
      x.id = w.at("id");
      x.kind = widget_kind_from_string(w.at("kind"));
      const auto& b = w.at("bbox");
      x.bbox = {b.at(0), b.at(1), b.at(2), b.at(3)};
      x.label = w.value("label", "");
      x.value = w.value("value", "");
      x.visible = w.value("visible", x.kind != WidgetKind::kMenuItem);
      x.screen = w.value("screen", std::string(kAllScreens));
      x.parent_menu = w.value("parent_menu", "");
      if (w.contains("effect")) {
        const std::string k = w["effect"].value("kind", "none");
        if (k == "navigate") {
          x.effect = {ClickEffect::Kind::kNavigate, w["effect"].at("screen")};
        } else if (k == "press") {
          x.effect = {ClickEffect::Kind::kPress, ""};
        } else if (k != "none") {
          throw Error("parse_error", "unknown click effect " + k);
        }
      }
      widgets.push_back(std::move(x));
    }
    std::vector<Hotkey> hotkeys;
    for (const auto& h : j.value("hotkeys", nlohmann::json::array())) {
      const std::string k = h.value("kind", "none");
      Hotkey::Kind kind = Hotkey::Kind::kNone;
      if (k == "close_menus") {
        kind = Hotkey::Kind::kCloseMenus;
      } else if (k == "next_screen") {
        kind = Hotkey::Kind::kNextScreen;
      } else if (k != "none") {
        throw Error("parse_error", "unknown hotkey kind " + k);
      }
      hotkeys.push_back({h.at("key"), kind});
    }
    const auto& native = j.at("native");
    const std::string focus = j.value("focus_mode", "click");
    return SoftwareModel(j.at("name"), {native.at(0), native.at(1)}, std::move(screens), std::move(widgets),
                         std::move(hotkeys), focus == "double_click" ? FocusMode::kDoubleClick : FocusMode::kClick,
                         j.value("vocabulary", std::vector<std::string>{}));
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse_error", std::string("software model: ") + e.what());
  }
}

Catalog::Catalog(std::vector<SoftwareModel> models, std::vector<std::string> templates)
    : templates_(std::move(templates)) {
  if (models.size() > kMaxSoftware) throw Error("invalid_catalog", "too many applications in catalog");
  for (auto& m : models) {
    for (const auto& existing : models_) {
      if (existing->name() == m.name()) throw Error("invalid_catalog", "duplicate application " + m.name());
    }
    models_.push_back(std::make_shared<const SoftwareModel>(std::move(m)));
  }
  for (const auto& t : templates_) {
    const auto& known = builtin_templates();
    if (std::find(known.begin(), known.end(), t) == known.end()) {
      throw Error("invalid_catalog", "unknown task template " + t);
    }
  }
}

const Catalog& Catalog::builtin() {
  static const Catalog catalog = [] {
    std::vector<SoftwareModel> models;
    for (const auto& spec : builtin_specs()) models.push_back(build(spec));
    return Catalog(std::move(models), builtin_templates());
  }();
  return catalog;
}

Catalog Catalog::from_json(const nlohmann::json& j) {
  std::vector<SoftwareModel> models;
  for (const auto& m : j.at("software")) models.push_back(model_from_json(m));
  return Catalog(std::move(models), j.value("templates", builtin_templates()));
}

Catalog Catalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open catalog " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse_error", "catalog " + path + ": " + e.what());
  }
}

nlohmann::json Catalog::to_json() const {
  nlohmann::json software = nlohmann::json::array();
  for (const auto& m : models_) software.push_back(model_to_json(*m));
  return {{"software", software}, {"templates", templates_}};
}

const SoftwareModel& Catalog::model(const std::string& name) const {
  for (const auto& m : models_) {
    if (m->name() == name) return *m;
  }
  throw UnknownSoftware(name);
}

int Catalog::slot(const std::string& name) const {
  for (std::size_t i = 0; i < models_.size(); ++i) {
    if (models_[i]->name() == name) return static_cast<int>(i);
  }
  throw UnknownSoftware(name);
}

std::vector<std::string> Catalog::names() const {
  std::vector<std::string> out;
  for (const auto& m : models_) out.push_back(m->name());
  return out;
}

}  // namespace coda::env
