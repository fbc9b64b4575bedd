#!/usr/bin/env python3
"""Fetch and convert the labelled real networks into rsclust's edge-list and label formats.

Sources:
  polblogs  http://www-personal.umich.edu/~mejn/netdata/polblogs.zip
            (polblogs.gml; node attribute "value" is the political leaning)
  email     https://snap.stanford.edu/data/email-Eu-core.txt.gz
            https://snap.stanford.edu/data/email-Eu-core-department-labels.txt.gz

Both graphs are made undirected and unweighted with self loops dropped, and
only the largest connected component is kept (1222 and 986 nodes). Output is
<out>/<name>_edges.txt and <out>/<name>_labels.txt with the original node ids.

    python3 tools/prepare_datasets.py polblogs --download -o data
    python3 tools/prepare_datasets.py email --edges email-Eu-core.txt.gz \
        --labels email-Eu-core-department-labels.txt.gz -o data
    rsclust real --edges data/polblogs_edges.txt --labels data/polblogs_labels.txt --K 2
"""

import argparse
import gzip
import io
import pathlib
import sys
import urllib.request
import zipfile

import networkx as nx

URLS = {
    "polblogs": ["http://www-personal.umich.edu/~mejn/netdata/polblogs.zip"],
    "email": [
        "https://snap.stanford.edu/data/email-Eu-core.txt.gz",
        "https://snap.stanford.edu/data/email-Eu-core-department-labels.txt.gz",
    ],
}


def fetch(url):
    with urllib.request.urlopen(url, timeout=60) as r:
        return r.read()


def read_bytes(path):
    data = pathlib.Path(path).read_bytes()
    return gzip.decompress(data) if str(path).endswith(".gz") else data


def polblogs_graph(gml_text):
    # The file lists some arcs twice, which parse_gml rejects unless told the
    # graph is a multigraph.
    if "multigraph" not in gml_text:
        gml_text = gml_text.replace("graph [", "graph [\n  multigraph 1", 1)
    g = nx.parse_gml(gml_text, label="id")
    labels = {v: int(d["value"]) for v, d in g.nodes(data=True)}
    return nx.Graph(g.to_undirected()), labels


def email_graph(edge_text, label_text):
    g = nx.Graph()
    for line in edge_text.splitlines():
        parts = line.split()
        if len(parts) >= 2:
            g.add_edge(int(parts[0]), int(parts[1]))
    labels = {}
    for line in label_text.splitlines():
        parts = line.split()
        if len(parts) >= 2:
            labels[int(parts[0])] = int(parts[1])
    return g, labels


def largest_component(g):
    g = nx.Graph(g)
    g.remove_edges_from(list(nx.selfloop_edges(g)))
    return g.subgraph(max(nx.connected_components(g), key=len)).copy()


def write(g, labels, out, name):
    out.mkdir(parents=True, exist_ok=True)
    edges_path = out / f"{name}_edges.txt"
    labels_path = out / f"{name}_labels.txt"
    with edges_path.open("w") as f:
        for u, v in sorted((min(a, b), max(a, b)) for a, b in g.edges()):
            f.write(f"{u} {v}\n")
    with labels_path.open("w") as f:
        for v in sorted(g.nodes()):
            f.write(f"{v} {labels[v]}\n")
    return edges_path, labels_path


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("dataset", choices=sorted(URLS))
    ap.add_argument("--download", action="store_true", help="fetch from the source URLs")
    ap.add_argument("--gml", help="local polblogs.gml or polblogs.zip")
    ap.add_argument("--edges", help="local email edge file (.txt or .gz)")
    ap.add_argument("--labels", help="local email label file (.txt or .gz)")
    ap.add_argument("-o", "--out", default="data")
    args = ap.parse_args(argv)

    if args.dataset == "polblogs":
        if args.download:
            raw, source = fetch(URLS["polblogs"][0]), "polblogs.zip"
        elif args.gml:
            raw, source = pathlib.Path(args.gml).read_bytes(), args.gml
        else:
            ap.error("polblogs needs --download or --gml")
        if source.endswith(".zip"):
            with zipfile.ZipFile(io.BytesIO(raw)) as z:
                raw = z.read(next(n for n in z.namelist() if n.endswith(".gml")))
        g, labels = polblogs_graph(raw.decode())
    else:
        if args.download:
            edge_raw, label_raw = (gzip.decompress(fetch(u)) for u in URLS["email"])
        elif args.edges and args.labels:
            edge_raw, label_raw = read_bytes(args.edges), read_bytes(args.labels)
        else:
            ap.error("email needs --download or both --edges and --labels")
        g, labels = email_graph(edge_raw.decode(), label_raw.decode())

    g = largest_component(g)
    paths = write(g, labels, pathlib.Path(args.out), args.dataset)
    print(f"{args.dataset}: {g.number_of_nodes()} nodes, {g.number_of_edges()} edges -> {paths[0]}, {paths[1]}")


if __name__ == "__main__":
    sys.exit(main())
