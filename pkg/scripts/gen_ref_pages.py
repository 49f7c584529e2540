"""Generate the API reference pages, the subcommand table and the navigation."""

from pathlib import Path

import mkdocs_gen_files

from dyrex.experiments.run import RUNNERS

nav = mkdocs_gen_files.Nav()

root = Path(__file__).parent.parent
pkg = root / "dyrex"

for path in sorted(pkg.rglob("*.py")):
    module_path = path.relative_to(root).with_suffix("")
    doc_path = path.relative_to(root).with_suffix(".md")
    full_doc_path = Path("reference", doc_path)

    parts = tuple(module_path.parts)

    # private helpers and the console entry point have no public API
    if parts[-1].startswith("_") and parts[-1] != "__init__":
        continue
    if parts[-1] == "__init__":
        parts = parts[:-1]
        doc_path = doc_path.with_name("index.md")
        full_doc_path = full_doc_path.with_name("index.md")

    nav[parts] = doc_path.as_posix()

    with mkdocs_gen_files.open(full_doc_path, "w") as fd:
        fd.write(f"::: {'.'.join(parts)}")

    mkdocs_gen_files.set_edit_path(full_doc_path, path.relative_to(root))

with mkdocs_gen_files.open("reference/subcommands.md", "w") as fd:
    fd.write("# Subcommands\n\n| subcommand | runner | summary |\n|---|---|---|\n")
    for name, runner in RUNNERS.items():
        summary = (runner.__doc__ or "").strip().splitlines()[0]
        fd.write(f"| `{name}` | `{runner.__name__}` | {summary} |\n")
nav[("subcommands",)] = "subcommands.md"

with mkdocs_gen_files.open("reference/SUMMARY.md", "w") as nav_file:
    nav_file.writelines(nav.build_literate_nav())
