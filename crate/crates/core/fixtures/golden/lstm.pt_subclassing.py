# Generated by nnport 0.1.0: tf/subclassing -> pt/subclassing, pivot sha256 b2f7345205c1122506cbf2329392820309ad46609a6a5d8e0274c15fa40d460a
import torch
from torch import nn

INPUT_SHAPE = (200,)
METRICS = ("accuracy",)
DATASETS = {
    "imdb": ("data/imdb", "classification", "sequences"),
    "sst2": ("data/sst2", "classification", "sequences"),
}


class LSTMNet(nn.Module):
    def __init__(self):
        super().__init__()
        self.embedding = nn.Embedding(num_embeddings=10000, embedding_dim=128)
        self.lstm1 = nn.LSTM(input_size=128, hidden_size=64, batch_first=True)
        self.lstm2 = nn.LSTM(input_size=64, hidden_size=64, batch_first=True)
        self.lstm3 = nn.LSTM(input_size=64, hidden_size=64, batch_first=True)
        self.dropout = nn.Dropout(p=0.3)
        self.classifier = nn.Linear(in_features=64, out_features=2)
        self.classifier_act = nn.Softmax(dim=-1)

    def forward(self, inputs):
        embedding = self.embedding(inputs)
        lstm1, _ = self.lstm1(embedding)
        lstm2, _ = self.lstm2(lstm1)
        merged = lstm1 + lstm2
        lstm3, _ = self.lstm3(merged)
        lstm3 = lstm3[:, -1, :]
        dropout = self.dropout(lstm3)
        classifier = self.classifier_act(self.classifier(dropout))
        return classifier


def make_loader(dataset):
    return torch.utils.data.DataLoader(dataset, batch_size=64, shuffle=True)


def train(model, loader):
    optimizer = torch.optim.Adam(model.parameters(), lr=0.001)
    criterion = nn.NLLLoss()
    for epoch in range(10):
        model.train()
        for x, y in loader:
            optimizer.zero_grad()
            loss = criterion(torch.log(model(x)), y)
            loss.backward()
            optimizer.step()
    return model
