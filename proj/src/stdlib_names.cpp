#include "envalign/stdlib_names.hpp"

namespace envalign {

const std::set<std::string>& default_stdlib_names() {
  static const std::set<std::string> names{
      "__future__",  "_thread",     "abc",          "argparse",    "array",
      "ast",         "asyncio",     "atexit",       "base64",      "binascii",
      "bisect",      "builtins",    "bz2",          "calendar",    "cmath",
      "cmd",         "code",        "codecs",       "collections", "colorsys",
      "compileall",  "concurrent",  "configparser", "contextlib",  "contextvars",
      "copy",        "copyreg",     "cProfile",     "csv",         "ctypes",
      "curses",      "dataclasses", "datetime",     "decimal",     "difflib",
      "dis",         "doctest",     "email",        "enum",        "errno",
      "faulthandler","filecmp",     "fileinput",    "fnmatch",     "fractions",
      "ftplib",      "functools",   "gc",           "getopt",      "getpass",
      "gettext",     "glob",        "graphlib",     "gzip",        "hashlib",
      "heapq",       "hmac",        "html",         "http",        "imaplib",
      "importlib",   "inspect",     "io",           "ipaddress",   "itertools",
      "json",        "keyword",     "linecache",    "locale",      "logging",
      "lzma",        "mailbox",     "marshal",      "math",        "mimetypes",
      "mmap",        "multiprocessing", "netrc",    "ntpath",      "numbers",
      "operator",    "optparse",    "os",           "pathlib",     "pdb",
      "pickle",      "pickletools", "pkgutil",      "platform",    "plistlib",
      "poplib",      "posixpath",   "pprint",       "profile",     "pstats",
      "pty",         "pwd",         "py_compile",   "pyclbr",      "pydoc",
      "queue",       "quopri",      "random",       "re",          "readline",
      "reprlib",     "resource",    "runpy",        "sched",       "secrets",
      "select",      "selectors",   "shelve",       "shlex",       "shutil",
      "signal",      "site",        "smtplib",      "socket",      "socketserver",
      "sqlite3",     "ssl",         "stat",         "statistics",  "string",
      "stringprep",  "struct",      "subprocess",   "symtable",    "sys",
      "sysconfig",   "tabnanny",    "tarfile",      "tempfile",    "termios",
      "textwrap",    "threading",   "time",         "timeit",      "tkinter",
      "token",       "tokenize",    "tomllib",      "traceback",   "tracemalloc",
      "tty",         "turtle",      "types",        "typing",      "unicodedata",
      "unittest",    "urllib",      "uuid",         "venv",        "warnings",
      "wave",        "weakref",     "webbrowser",   "wsgiref",     "xml",
      "xmlrpc",      "zipapp",      "zipfile",      "zipimport",   "zlib",
      "zoneinfo",
  };
  return names;
}

}  // namespace envalign
