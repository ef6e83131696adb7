#!/usr/bin/env python3
# Copyright 2026 The qa-router Authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerates mini_corpus.csv: 150 factual (MS MARCO style) and 150 database
(MIMICSQL / Spider style) Portuguese questions. Deterministic for a seed."""

import csv
import random
import sys

SEED = 20260101

CONDITIONS = [
    "fístula", "hipertensão", "diabetes", "asma", "anemia", "gripe", "dengue",
    "pneumonia", "bronquite", "artrite", "gastrite", "sinusite", "enxaqueca",
    "catapora", "rubéola", "hepatite", "miopia", "escoliose", "psoríase",
    "tendinite", "osteoporose", "insônia", "labirintite", "apendicite",
    "cistite", "otite", "conjuntivite", "hipotireoidismo", "leucemia", "sepse",
]
DRUGS = [
    "paracetamol", "ibuprofeno", "amoxicilina", "omeprazol", "losartana",
    "metformina", "dipirona", "insulina", "warfarina", "prednisona",
    "sinvastatina", "nephrocaps", "heparina", "furosemida",
]
ORGANS = [
    "fígado", "pâncreas", "baço", "rim", "coração", "pulmão", "tireoide",
    "estômago", "intestino delgado", "cérebro", "cerebelo", "apêndice",
]
SYMPTOMS = [
    "dor nas costas", "dor de cabeça", "febre alta", "tosse seca", "tontura",
    "falta de ar", "dor no peito", "coceira na pele", "inchaço nas pernas",
    "cansaço excessivo", "visão turva", "náusea",
]
NAMES = ["João Silva", "Maria Souza", "Ana Lima", "Carlos Pereira", "Paulo Costa",
         "Lucia Alves", "Pedro Santos", "Rita Gomes"]
TABLE_WORDS = ["pacientes", "médicos", "enfermeiros", "consultas", "procedimentos",
               "cientistas", "projetos", "enzimas", "proteínas", "internações"]

FACTUAL = [
    "O que é {c}?", "o que é {c}", "O que causa {c}", "quais são os sintomas de {c}",
    "Como tratar {c}?", "como prevenir {c}", "{c} é contagiosa", "qual a causa da {c}",
    "o que significa {c}", "quanto tempo dura a {c}", "a {c} tem cura",
    "Para que serve o {d}?", "para que serve {d}", "quais são os efeitos colaterais do {d}",
    "o {d} causa sono", "como o {d} age no corpo", "qual a dose do {d}",
    "Qual é a função do {o}?", "onde fica o {o}", "o que faz o {o}",
    "O que causa {s}?", "o que pode causar {s}", "{s} é sinal de quê",
    "por que sinto {s}", "quando {s} é grave", "como aliviar {s}",
    "qual é o propósito do {d}", "o que acontece se o {o} parar",
    "De onde se ramifica a artéria {a}?", "qual é a definição de {c}",
    "quantos anos vive uma pessoa com {c}", "quantas calorias queima o {o}",
    "qual é o número normal de plaquetas", "quantos dias dura o tratamento de {c}",
    "qual é o propósito do pedido de {d}", "quantos pacientes sobrevivem à {c}",
]
ARTERIES = ["descendente posterior", "carótida", "femoral", "radial", "aorta abdominal"]

SQL = [
    "quantos pacientes com menos de {n} anos?", "Quantos pacientes têm mais de {n} anos?",
    "encontre o número de pacientes com diagnóstico de {c}.",
    "quantos pacientes foram diagnosticados com {c}",
    "qual é o número de pacientes internados em {y}",
    "forneça o número de pacientes admitidos antes de {y}.",
    "quantos pacientes receberam prescrição de {d}",
    "Quais são os nomes dos pacientes que marcaram uma consulta?",
    "liste os nomes dos médicos que atenderam o paciente {p}",
    "qual é a idade do paciente {p}", "qual é o estado civil do paciente {p}",
    "mostre a data de admissão do paciente {p}", "qual é o tipo de admissão do paciente {p}",
    "quantos {t} existem", "Quantos {t} estão cadastrados?", "conte o número de {t}",
    "liste todos os {t} ordenados pelo nome", "qual o total de {t} no banco",
    "Quais são os nomes dos cientistas designados para qualquer projeto?",
    "quantos cientistas trabalham no projeto {x}",
    "mostre o nome das enzimas que interagem com o {d}",
    "quais proteínas pertencem ao instituto {x}",
    "encontre o procedimento mais caro.", "Qual é o procedimento mais barato?",
    "liste os procedimentos com custo acima de {m}",
    "qual médico tem o maior número de consultas",
    "quantas consultas o médico {p} realizou em {y}",
    "quantos pacientes do sexo feminino têm {c}",
    "encontre o número de pacientes únicos com diagnóstico de {c}.",
    "qual é a média de idade dos pacientes com {c}",
    "como o {d} é administrado", "qual é a via de administração do {d}",
    "qual é a dose do {d} prescrita", "o que é o diagnóstico do paciente {p}",
]
PROJECTS = ["Genoma", "Vacina", "Proteoma", "Neuro", "Alfa", "Beta"]


def fill(template, rng):
    return template.format(
        c=rng.choice(CONDITIONS), d=rng.choice(DRUGS), o=rng.choice(ORGANS),
        s=rng.choice(SYMPTOMS), a=rng.choice(ARTERIES), n=rng.choice([18, 30, 45, 60, 65, 80]),
        y=rng.choice([2100, 2115, 2120, 2138, 2150]), p=rng.choice(NAMES),
        t=rng.choice(TABLE_WORDS), x=rng.choice(PROJECTS), m=rng.choice([100, 250, 500, 1000]))


def draw(templates, count, rng, source):
    seen = set()
    rows = []
    while len(rows) < count:
        q = fill(rng.choice(templates), rng)
        if q.lower() in seen:
            continue
        seen.add(q.lower())
        rows.append((q, source))
    return rows


def main(out_path):
    rng = random.Random(SEED)
    factual = [(q, "factual", "msmarco-style") for q, _ in draw(FACTUAL, 150, rng, "")]
    sql = []
    for q, _ in draw(SQL, 150, rng, ""):
        source = "spider-style" if any(w in q.lower() for w in
                                       ("cientista", "enzima", "proteína", "procedimento",
                                        "nomes dos pacientes", "médico")) else "mimicsql-style"
        sql.append((q, "sql", source))
    rows = factual + sql
    rng.shuffle(rows)
    with open(out_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["question", "label", "source"])
        w.writerows(rows)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "mini_corpus.csv")
