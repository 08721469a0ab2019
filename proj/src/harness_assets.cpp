#include "envalign/corpus.hpp"

#include "envalign/util.hpp"

namespace envalign {

namespace fs = std::filesystem;

namespace {

const char* kHermeticLaunch = R"PY(#!/usr/bin/env python3
"""Run a repository entrypoint against the local stub package index.

Only packages declared in the repository manifest are placed on the import
path, so undeclared third-party imports fail exactly as they would in a
fresh environment.
"""
import os
import shutil
import subprocess
import sys
import tempfile


def declared_packages(root):
    names = []
    req = os.path.join(root, "requirements.txt")
    if os.path.exists(req):
        for line in open(req, encoding="utf-8", errors="replace"):
            line = line.split("#", 1)[0].strip()
            if not line or line.startswith("-"):
                continue
            name = ""
            for ch in line:
                if ch.isalnum() or ch in "._-":
                    name += ch
                else:
                    break
            if name:
                names.append(name.lower().replace("_", "-").replace(".", "-"))
    return names


def main():
    root = os.path.abspath(sys.argv[1])
    index = os.path.join(os.path.dirname(os.path.abspath(__file__)), "pkgs")
    stage = tempfile.mkdtemp(prefix="envalign-pkgs-")
    try:
        for name in declared_packages(root):
            pkg = os.path.join(index, name.replace("-", "_"))
            if os.path.isdir(pkg):
                shutil.copytree(pkg, os.path.join(stage, os.path.basename(pkg)))
        env = dict(os.environ)
        env["PYTHONPATH"] = stage
        env["PYTHONDONTWRITEBYTECODE"] = "1"
        if sys.argv[2] == "--tests":
            targets = sorted(
                f for f in os.listdir(root)
                if f.startswith("test_") and f.endswith(".py"))
        else:
            targets = [sys.argv[2]]
        for target in targets:
            proc = subprocess.run(
                [sys.executable, "-S", os.path.join(root, target)],
                cwd=root, env=env)
            if proc.returncode != 0:
                sys.exit(proc.returncode)
    finally:
        shutil.rmtree(stage, ignore_errors=True)


if __name__ == "__main__":
    main()
)PY";

const char* kHermeticInstall = R"PY(#!/usr/bin/env python3
"""Check that every declared dependency exists in the stub package index.

Mirrors an installer's failure output for unknown distributions.
"""
import os
import sys


def main():
    root = os.path.abspath(sys.argv[1])
    index = os.path.join(os.path.dirname(os.path.abspath(__file__)), "pkgs")
    req = os.path.join(root, "requirements.txt")
    missing = []
    if os.path.exists(req):
        for line in open(req, encoding="utf-8", errors="replace"):
            line = line.split("#", 1)[0].strip()
            if not line or line.startswith("-"):
                continue
            name = ""
            for ch in line:
                if ch.isalnum() or ch in "._-":
                    name += ch
                else:
                    break
            if not name:
                continue
            norm = name.lower().replace("_", "-").replace(".", "-")
            if not os.path.isdir(os.path.join(index, norm.replace("-", "_"))):
                missing.append(norm)
    for name in missing:
        print("ERROR: Could not find a version that satisfies the requirement "
              + name, file=sys.stderr)
        print("ERROR: No matching distribution found for " + name,
              file=sys.stderr)
    if missing:
        sys.exit(1)


if __name__ == "__main__":
    main()
)PY";

const char* kStubRequests = R"PY(class Session:
    def __init__(self):
        self.headers = {}

    def get(self, url, **kwargs):
        raise RuntimeError("network access is disabled in the stub index")


def get(url, **kwargs):
    raise RuntimeError("network access is disabled in the stub index")
)PY";

const char* kStubFlask = R"PY(class Flask:
    def __init__(self, name):
        self.name = name
        self.routes = {}

    def route(self, path):
        def register(fn):
            self.routes[path] = fn
            return fn
        return register
)PY";

struct TemplateFile {
  const char* path;
  const char* content;
};

const TemplateFile kWebappFiles[] = {
    {"requirements.txt", "requests\n"},
    {"main.py",
     R"PY(from src.app import run

if __name__ == "__main__":
    run()
)PY"},
    {"src/__init__.py", ""},
    {"src/app.py",
     R"PY(import requests

from src.util import add, clamp


def run():
    session = requests.Session()
    total = add(2, 3)
    print("ready", total, clamp(total, 0, 4))
)PY"},
    {"src/util.py",
     R"PY(def add(a, b):
    return a + b


def clamp(value, low, high):
    if value < low:
        return low
    if value > high:
        return high
    return value
)PY"},
    {"test_app.py",
     R"PY(from src.util import add, clamp

assert add(2, 3) == 5
assert add(-1, 1) == 0
assert clamp(10, 0, 4) == 4
assert clamp(-2, 0, 4) == 0
assert clamp(3, 0, 4) == 3
print("ok")
)PY"},
};

const TemplateFile kServiceFiles[] = {
    {"requirements.txt", "flask\n"},
    {"main.py",
     R"PY(from service.api import build_app

if __name__ == "__main__":
    app = build_app()
    print("service", app.name)
)PY"},
    {"service/__init__.py", ""},
    {"service/api.py",
     R"PY(import flask

from service.models import Item, total_price


def build_app():
    app = flask.Flask("service")
    return app


def checkout(items):
    return total_price(items)
)PY"},
    {"service/models.py",
     R"PY(class Item:
    def __init__(self, price, quantity):
        self.price = price
        self.quantity = quantity


def total_price(items):
    total = 0
    for item in items:
        total += item.price * item.quantity
    return total
)PY"},
    {"test_service.py",
     R"PY(from service.models import Item, total_price

assert total_price([]) == 0
assert total_price([Item(2, 3)]) == 6
assert total_price([Item(1, 1), Item(4, 2)]) == 9
print("ok")
)PY"},
};

const TemplateFile kClientFiles[] = {
    {"main.py",
     R"PY(from app.client import APIClient


def main():
    client = APIClient("https://example.com")
    print(client.describe())


if __name__ == "__main__":
    main()
)PY"},
    {"requirements.txt", ""},
    {"src/__init__.py", ""},
    {"src/client.py",
     R"PY(import requests


class APIClient:
    def __init__(self, base_url):
        self.base_url = base_url
        self.session = requests.Session()

    def describe(self):
        return "APIClient for " + self.base_url
)PY"},
};

void write_files(const fs::path& dir, const TemplateFile* files, size_t count) {
  for (size_t i = 0; i < count; ++i) {
    write_file_atomic(dir / files[i].path, files[i].content);
  }
}

}  // namespace

std::vector<std::string> builtin_template_names() { return {"webapp", "service"}; }

void write_template(const std::string& name, const fs::path& dir) {
  if (name == "webapp") {
    write_files(dir, kWebappFiles, std::size(kWebappFiles));
  } else if (name == "service") {
    write_files(dir, kServiceFiles, std::size(kServiceFiles));
  } else {
    throw TemplateBroken("unknown template: " + name);
  }
}

void write_client_fixture(const fs::path& dir) {
  write_files(dir, kClientFiles, std::size(kClientFiles));
}

void write_harness(const fs::path& dir) {
  write_file_atomic(dir / "hermetic_launch.py", kHermeticLaunch);
  write_file_atomic(dir / "hermetic_install.py", kHermeticInstall);
  write_file_atomic(dir / "pkgs" / "requests" / "__init__.py", kStubRequests);
  write_file_atomic(dir / "pkgs" / "flask" / "__init__.py", kStubFlask);
}

ExecConfig harness_exec_config(const fs::path& harness_dir, double timeout_seconds) {
  ExecConfig config;
  // The executor runs phases with the workspace as working directory, so the
  // harness location must not depend on it.
  fs::path base = fs::absolute(harness_dir);
  std::string launch = (base / "hermetic_launch.py").string();
  std::string install = (base / "hermetic_install.py").string();
  config.install_cmd = CommandTemplate{{"python3", install, "{root}"}};
  config.launch_cmd = CommandTemplate{{"python3", launch, "{root}", "main.py"}};
  config.test_cmd = CommandTemplate{{"python3", launch, "{root}", "--tests"}};
  config.timeout_seconds = timeout_seconds;
  return config;
}

}  // namespace envalign
