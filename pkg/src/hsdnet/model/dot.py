"""Graphviz DOT rendering of a tree network."""

from graphviz import Digraph

from .tree import HsdTree


def _class_label(class_set: tuple[int, ...]) -> str:
    return ",".join(str(c) for c in class_set)


def export_dot(tree: HsdTree, name: str = "hsd") -> str:
    """DOT digraph: one node per tree node, labeled with L(v), |channels| and C(v).

    Nodes and edges are emitted in id order, so the text is deterministic.
    """
    graph = Digraph(name=name)
    graph.attr("node", shape="box", fontname="Helvetica")
    leaf_ids = {leaf.node_id for leaf in tree.leaves()}
    for node_id in sorted(tree.nodes):
        node = tree.nodes[node_id]
        label = f"id={node_id} | L={node.layer_index} | K={len(node.channels)} | C={{{_class_label(node.class_set)}}}"
        if node.is_root:
            graph.node(str(node_id), label, shape="ellipse")
        elif node_id in leaf_ids:
            graph.node(str(node_id), label, style="bold")
        else:
            graph.node(str(node_id), label)
    for node_id in sorted(tree.nodes):
        node = tree.nodes[node_id]
        if node.parent_id is not None:
            graph.edge(str(node.parent_id), str(node_id))
    return graph.source
