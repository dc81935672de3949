# -*- coding: utf-8 -*-
import functools, sys, traceback, click
from typing import Dict, List, Optional, Tuple

from . import __version__
from .channel import DeliveryStats, route_and_deliver
from .config import RunConfig
from .errors import ChecksumError, DnaNetError, MissingSegmentError, ValidationError
from .exporter import md_to_html
from .fasta import FastaRecord, format_fasta, read_fasta
from .ledger import (
    DnaChain, ReplicaSet, digest, extend_stats, read_chain, replicate,
    validate_chain, write_chain, mine_stats, GENESIS_PREV,
)
from .output import append_mining_csv, hop_csv, save_hop_csv, save_json, save_markdown
from .stack import Address, Frame, StackConfig, StackDecoder, encode_message
from .topology import line_topology, read_topology

DEMO_PAYLOAD = (
    b"Cells talk by passing short DNA strands through gap junctions; "
    b"every layer of this message was ligated on and will be cut off again."
)


def _info(msg: str, **style):
    click.secho(msg, err=True, **style)


def _warn(msg: str):
    click.secho(msg, err=True, fg="yellow")


def _load_cfg(config_path: Optional[str], **overrides) -> RunConfig:
    cfg = RunConfig.from_file(config_path) if config_path else RunConfig()
    cfg.merge_cli(**overrides)
    for line in cfg.describe():
        _info(f"[Config] {line}")
    return cfg


def guarded(cmd_name: str):
    """库层异常 -> 一行可解析的错误信息 + 退出码 1；click 的用法错误保持退出码 2。"""
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except (DnaNetError, OSError) as e:
                _info(f"[{cmd_name}] ERROR {type(e).__name__}: {e}", fg="red")
                if kwargs.get("verbose"):
                    traceback.print_exc()
                sys.exit(1)
        return wrapper
    return deco


# ---- 共享选项 ----
def config_option(fn):
    fn = click.option("--verbose", is_flag=True, help="打印各阶段的详细日志")(fn)
    fn = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                      help="配置文件路径（YAML）")(fn)
    return fn


def stack_options(fn):
    for opt in reversed([
        click.option("--ecc", type=click.Choice(["none", "triple"]), default=None, help="数据链路层 ECC"),
        click.option("--segment-size", type=int, default=None, help="每段最大负载（nt）"),
        click.option("--src", default=None, help="源地址（16 bit 十六进制）"),
        click.option("--dst", default=None, help="目的地址（16 bit 十六进制或 broadcast）"),
        click.option("--enzyme", default=None, help="分段所用的限制酶名"),
        click.option("--presentation", type=click.Choice(["raw", "codon_view"]), default=None),
    ]):
        fn = opt(fn)
    return fn


def noise_options(fn):
    for opt in reversed([
        click.option("--seed", type=int, default=None, help="随机种子（64 bit）"),
        click.option("--p-sub", type=float, default=None, help="每 nt 替换概率"),
        click.option("--p-ins", type=float, default=None, help="每 nt 插入概率"),
        click.option("--p-del", type=float, default=None, help="每 nt 删除概率"),
    ]):
        fn = opt(fn)
    return fn


def _frames_to_records(frames: List[Frame]) -> List[FastaRecord]:
    return [FastaRecord(f"frame {i} ecc={fr.ecc_mode}", fr.to_nt()) for i, fr in enumerate(frames)]


def decode_frames(frames: List[Frame], stack: StackConfig,
                  local_addr: Optional[Address] = None, tag: str = "[Decode]") -> Tuple[bytes, int]:
    """逐帧喂给重组器；无法通过数据链路/报头检查的帧被跳过，缺段由 finish 报告。"""
    decoder = StackDecoder(stack, local_addr)
    skipped = 0
    for i, fr in enumerate(frames):
        try:
            decoder.feed(fr)
        except DnaNetError as e:
            skipped += 1
            _warn(f"{tag} frame {i} discarded: {type(e).__name__}: {e}")
    return decoder.finish(), skipped


def _write_bytes(data: bytes, out: Optional[str]):
    if out:
        with open(out, "wb") as f:
            f.write(data)
    else:
        stream = click.get_binary_stream("stdout")
        stream.write(data)
        stream.flush()


def _write_text(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        click.echo(text, nl=False)


def _finish_report(report: Optional[str], html: bool, **kwargs):
    if not report:
        return
    md_path = save_markdown(report, **kwargs)
    _info(f"Saved: {md_path}")
    if html:
        _info(f"Saved: {md_to_html(md_path)}")


@click.group(invoke_without_command=True)
@click.version_option(__version__, prog_name="dna-netstack")
@click.option("--demo", "run_demo", is_flag=True, help="运行演示（与 demo 子命令相同）")
@click.pass_context
def cli(ctx, run_demo):
    """dna-netstack：核苷酸协议栈、细胞网络与 DNA 账本的确定性模拟"""
    if run_demo:
        ctx.invoke(demo)
    elif ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


# ========== encode / decode ==========

@cli.command("encode")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, help="帧文件输出路径（默认 stdout）")
@stack_options
@config_option
@guarded("encode")
def encode(input_path, out, ecc, segment_size, src, dst, enzyme, presentation, config_path, verbose):
    """把任意文件编码为帧记录（FASTA 风格）"""
    cfg = _load_cfg(config_path, ecc=ecc, segment_size=segment_size, src=src, dst=dst,
                    enzyme=enzyme, presentation=presentation)
    with open(input_path, "rb") as f:
        payload = f.read()
    frames = encode_message(payload, cfg.to_stack_config())
    _info(f"[Encode] {len(payload)} byte(s) -> {len(frames)} frame(s)")
    if verbose:
        for i, fr in enumerate(frames):
            _info(f"[Encode] frame {i}: {len(fr.body)} nt body, checksum={fr.frame_checksum}")
            if fr.codon_view is not None:
                _info(f"[Encode] frame {i} codon view: {fr.codon_view[:60]}")
    _write_text(format_fasta(_frames_to_records(frames)), out)
    if out:
        _info(f"Saved: {out}")


@cli.command("decode")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, help="还原文件路径（默认 stdout）")
@stack_options
@config_option
@guarded("decode")
def decode(input_path, out, ecc, segment_size, src, dst, enzyme, presentation, config_path, verbose):
    """把帧记录还原为原始文件"""
    cfg = _load_cfg(config_path, ecc=ecc, segment_size=segment_size, src=src, dst=dst,
                    enzyme=enzyme, presentation=presentation)
    frames: List[Frame] = []
    for rec in read_fasta(input_path):
        try:
            frames.append(Frame.from_nt(rec.sequence))
        except DnaNetError as e:
            _warn(f"[Decode] record '>{rec.header}' is not a frame: {e}")
    data, skipped = decode_frames(frames, cfg.to_stack_config())
    _info(f"[Decode] {len(frames)} frame(s), {skipped} discarded -> {len(data)} byte(s)")
    _write_bytes(data, out)


# ========== send ==========

def _decode_delivered(delivered: Dict[int, List[Frame]], stack: StackConfig,
                      dst: Address) -> Dict[int, bytes]:
    targets = sorted(delivered) if dst.is_broadcast else [dst.value]
    if not targets:
        raise MissingSegmentError([], 0)
    out = {}
    for node in targets:
        data, _ = decode_frames(delivered.get(node, []), stack, Address(node), tag=f"[Send] {node:04x}")
        out[node] = data
    return out


@cli.command("send")
@click.argument("payload_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--topology", default=None, type=click.Path(exists=True, dir_okay=False),
              help="拓扑文件（默认：src 与 dst 两节点直连）")
@click.option("--out", default=None, help="目的节点还原出的负载写入此路径")
@click.option("--stats-csv", default=None, help="逐跳统计 CSV 路径（默认 stdout）")
@click.option("--report", default=None, help="Markdown 运行报告路径")
@click.option("--html", "html_enabled", is_flag=True, help="同时导出 HTML 报告")
@click.option("--no-switching", is_flag=True, help="不切换链路，按拓扑中的静态通断转发")
@noise_options
@stack_options
@config_option
@guarded("send")
def send(payload_path, topology, out, stats_csv, report, html_enabled, no_switching,
         seed, p_sub, p_ins, p_del, ecc, segment_size, src, dst, enzyme, presentation,
         config_path, verbose):
    """编码 -> 逐跳转发 -> 在目的节点解码，输出逐跳统计"""
    cfg = _load_cfg(config_path, seed=seed, p_sub=p_sub, p_ins=p_ins, p_del=p_del,
                    ecc=ecc, segment_size=segment_size, src=src, dst=dst, enzyme=enzyme,
                    presentation=presentation, topology=topology, stats_csv=stats_csv, out=out,
                    switching=False if no_switching else None)
    stack = cfg.to_stack_config()
    noise = cfg.to_noise_model()
    if cfg.topology:
        topo = read_topology(cfg.topology)
    else:
        topo = line_topology([stack.src_addr.value, stack.dst_addr.value])
    with open(payload_path, "rb") as f:
        payload = f.read()

    frames = encode_message(payload, stack)
    _info(f"[Send] {len(payload)} byte(s) in {len(frames)} frame(s): "
          f"{stack.src_addr} -> {stack.dst_addr}")
    stats = DeliveryStats()
    delivered = route_and_deliver(frames, stack.src_addr, stack.dst_addr, topo, noise,
                                  stats=stats, switching=cfg.switching)
    rows = stats.rows()
    if cfg.stats_csv:
        _info(f"Saved: {save_hop_csv(rows, cfg.stats_csv)}")
    else:
        click.echo(hop_csv(rows), nl=False)
    if stats.ttl_expired:
        _warn(f"[Send] {stats.ttl_expired} frame(s) dropped on TTL expiry")

    summary = {"frames": len(frames), "ttl_expired": stats.ttl_expired}
    try:
        recovered = _decode_delivered(delivered, stack, stack.dst_addr)
    except DnaNetError:
        summary["recovered"] = False
        _finish_report(report, html_enabled, title="dna-netstack send", settings=cfg.describe(),
                       hop_rows=rows, summary=summary)
        raise
    ok = all(data == payload for data in recovered.values())
    for node, data in recovered.items():
        _info(f"[Send] node {node:04x} recovered={str(data == payload).lower()} bytes={len(data)}")
    t = stats.totals()
    summary.update(recovered=ok, corrupted=t.corrupted, corrected=t.corrected, dropped=t.dropped)
    if cfg.out and recovered:
        _write_bytes(recovered[min(recovered)], cfg.out)
    _finish_report(report, html_enabled, title="dna-netstack send", settings=cfg.describe(),
                   hop_rows=rows, summary=summary)
    if not ok:
        raise ChecksumError("recovered payload differs from the original")


# ========== chain ==========

@cli.group("chain")
def chain():
    """DNA 账本：创世、挖矿、校验、复制与分叉消解"""


def _record_mining(stats_csv: Optional[str], rows: List[dict]):
    if stats_csv:
        _info(f"Saved: {append_mining_csv(rows, stats_csv)}")


@chain.command("init")
@click.option("--out", required=True, help="链文件输出路径")
@click.option("--difficulty", type=int, default=None, help="PoW 难度（摘要开头的 A 个数）")
@click.option("--payload", default="", help="创世区块负载（文本）")
@click.option("--stats-csv", default=None, help="挖矿统计 CSV（追加）")
@config_option
@guarded("chain init")
def chain_init(out, difficulty, payload, stats_csv, config_path, verbose):
    cfg = _load_cfg(config_path, difficulty=difficulty, out=out, stats_csv=stats_csv)
    block, attempts, wall_ms = mine_stats(0, GENESIS_PREV, payload.encode("utf-8"), int(cfg.difficulty))
    ch = DnaChain((block,), int(cfg.difficulty))
    write_chain(ch, cfg.out)
    _record_mining(cfg.stats_csv, [{"index": 0, "difficulty": ch.difficulty,
                                    "attempts": attempts, "wall_ms": f"{wall_ms:.3f}"}])
    _info(f"[Chain] genesis mined in {attempts} attempt(s) -> {cfg.out}")


@chain.command("mine")
@click.argument("chain_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--payload", "payloads", multiple=True, required=True, help="新区块负载（文本，可多次）")
@click.option("--out", default=None, help="输出路径（默认覆盖输入）")
@click.option("--stats-csv", default=None, help="挖矿统计 CSV（追加）")
@config_option
@guarded("chain mine")
def chain_mine(chain_path, payloads, out, stats_csv, config_path, verbose):
    cfg = _load_cfg(config_path, out=out, stats_csv=stats_csv)
    ch = read_chain(chain_path)
    rows = []
    for text in payloads:
        ch, attempts, wall_ms = extend_stats(ch, text.encode("utf-8"))
        rows.append({"index": len(ch) - 1, "difficulty": ch.difficulty,
                     "attempts": attempts, "wall_ms": f"{wall_ms:.3f}"})
        if verbose:
            _info(f"[Chain] block {len(ch) - 1}: {attempts} attempt(s), {wall_ms:.1f} ms")
    target = cfg.out or chain_path
    write_chain(ch, target)
    _record_mining(cfg.stats_csv, rows)
    _info(f"[Chain] {len(payloads)} block(s) mined, length {len(ch)} -> {target}")


@chain.command("validate")
@click.argument("chain_path", type=click.Path(exists=True, dir_okay=False))
@config_option
@guarded("chain validate")
def chain_validate(chain_path, config_path, verbose):
    """有效则退出码 0；否则在 stdout 列出全部违规并以 1 退出"""
    ch = read_chain(chain_path)
    violations = validate_chain(ch)
    for v in violations:
        click.echo(str(v))
    if violations:
        raise ValidationError(violations)
    _info(f"[Chain] valid, length {len(ch)}, difficulty {ch.difficulty}")


@chain.command("replicate")
@click.argument("chain_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, help="复制品输出路径")
@click.option("--p-mut", type=float, default=None, help="每 nt 突变概率")
@click.option("--seed", type=int, default=None, help="随机种子")
@config_option
@guarded("chain replicate")
def chain_replicate(chain_path, out, p_mut, seed, config_path, verbose):
    cfg = _load_cfg(config_path, p_mut=p_mut, seed=seed, out=out)
    copy = replicate(read_chain(chain_path), float(cfg.p_mut), int(cfg.seed))
    write_chain(copy, cfg.out)
    _info(f"[Chain] replicated with p_mut={cfg.p_mut} -> {cfg.out}")


@chain.command("resolve")
@click.argument("replica_paths", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, help="胜出链的输出路径")
@click.option("--confirmations", type=int, default=None, help="确认深度")
@config_option
@guarded("chain resolve")
def chain_resolve(replica_paths, out, confirmations, config_path, verbose):
    """在多个副本中按“最长有效链”规则选出胜者"""
    cfg = _load_cfg(config_path, out=out, confirmations=confirmations)
    replicas = ReplicaSet({i: read_chain(p) for i, p in enumerate(replica_paths)})
    for i, p in enumerate(replica_paths):
        n = len(validate_chain(replicas.replicas[i]))
        _info(f"[Chain] replica {i} ({p}): length {len(replicas.replicas[i])}, "
              f"{'valid' if n == 0 else f'{n} violation(s)'}")
    winner = replicas.resolve(int(cfg.confirmations))
    write_chain(winner, cfg.out)
    _info(f"[Chain] winner length {len(winner)}, tip {digest(winner.tip)[:16]}... -> {cfg.out}")


# ========== demo ==========

@cli.command("demo")
@click.option("--report", default=None, help="Markdown 运行报告路径")
@click.option("--html", "html_enabled", is_flag=True, help="同时导出 HTML 报告")
@noise_options
@config_option
@guarded("demo")
def demo(report=None, html_enabled=False, seed=None, p_sub=None, p_ins=None, p_del=None,
         config_path=None, verbose=False):
    """三细胞链路上的整条协议栈演示 + 三节点分叉与消解"""
    cfg = _load_cfg(config_path, seed=seed, p_sub=p_sub, p_ins=p_ins, p_del=p_del,
                    src="0001", dst="0003")
    stack = cfg.to_stack_config()
    topo = line_topology([0x0001, 0x0002, 0x0003])

    # 1) 协议栈 + 网络
    frames = encode_message(DEMO_PAYLOAD, stack)
    stats = DeliveryStats()
    delivered = route_and_deliver(frames, stack.src_addr, stack.dst_addr, topo,
                                  cfg.to_noise_model(), stats=stats)
    try:
        data, _ = decode_frames(delivered.get(stack.dst_addr.value, []), stack, tag="[Demo]")
        recovered = data == DEMO_PAYLOAD
    except DnaNetError as e:
        _warn(f"[Demo] delivery failed: {type(e).__name__}: {e}")
        recovered = False
    t = stats.totals()

    # 2) 账本：三个节点，一个突变分叉，一个延长
    rng_seed = int(cfg.seed)
    base = DnaChain.genesis(int(cfg.difficulty), b"genesis")
    for text in (b"alpha", b"beta"):
        base, _, _ = extend_stats(base, text)
    longer, _, _ = extend_stats(base, b"gamma")
    mutated = replicate(base, max(float(cfg.p_mut), 0.01), rng_seed)
    replicas = ReplicaSet({1: base, 2: longer, 3: mutated})
    chain_lines = [
        f"node {nid:04x}: length {len(ch)}, "
        f"{'valid' if not validate_chain(ch) else f'{len(validate_chain(ch))} violation(s)'}"
        for nid, ch in sorted(replicas.replicas.items())
    ]
    winner = replicas.resolve(int(cfg.confirmations))
    chain_lines.append(f"winner: length {len(winner)}, tip {digest(winner.tip)[:16]}...")
    if verbose:
        for line in chain_lines:
            _info(f"[Demo] {line}")

    summary = {
        "frames": len(frames), "recovered": recovered, "corrupted": t.corrupted,
        "corrected": t.corrected, "dropped": t.dropped, "ttl_expired": stats.ttl_expired,
        "chain_winner_length": len(winner),
        "chain_replicas_adopted": sum(1 for ch in replicas.replicas.values() if ch == winner),
    }
    for k in sorted(summary):
        click.echo(f"{k}={str(summary[k]).lower() if isinstance(summary[k], bool) else summary[k]}")
    if report:
        save_json(summary, report.rsplit(".", 1)[0] + ".json")
    _finish_report(report, html_enabled, title="dna-netstack demo", settings=cfg.describe(),
                   hop_rows=stats.rows(), summary=summary, chain_lines=chain_lines)


if __name__ == "__main__":
    cli()
